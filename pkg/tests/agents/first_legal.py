"""Protocol test agent: first legal order per location, pure stdlib."""
import json
import sys


def main():
    out = sys.stdout
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        msg = json.loads(line)
        kind = msg.get("type")
        if kind == "hello":
            reply = {"type": "hello", "protocol": 1, "name": "first-legal"}
        elif kind == "request_orders":
            orders = [sorted(texts)[0]
                      for loc, texts in sorted(msg["legal"].items()) if texts]
            reply = {"type": "orders", "orders": orders}
        elif kind == "bye":
            break
        else:
            reply = {"type": "error", "message": f"unexpected {kind}"}
        out.write(json.dumps(reply) + "\n")
        out.flush()


if __name__ == "__main__":
    main()
