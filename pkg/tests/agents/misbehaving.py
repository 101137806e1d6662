"""Protocol test agent that misbehaves on demand.

argv[1]: "illegal" answers with nonsense orders; "slow" sleeps past any
reasonable timeout before answering.
"""
import json
import sys
import time

MODE = sys.argv[1] if len(sys.argv) > 1 else "illegal"


def main():
    out = sys.stdout
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        msg = json.loads(line)
        kind = msg.get("type")
        if kind == "hello":
            reply = {"type": "hello", "protocol": 1, "name": f"mis-{MODE}"}
        elif kind == "request_orders":
            if MODE == "slow":
                time.sleep(30)
            locs = sorted(msg["legal"])
            orders = []
            for loc in locs:
                texts = msg["legal"][loc]
                if texts:
                    unit = sorted(texts)[0].split(" - ")[0].split(" H")[0]
                    unit = " ".join(sorted(texts)[0].split()[:2])
                    orders.append(f"{unit} - SYR")  # almost surely illegal
            reply = {"type": "orders", "orders": orders}
        elif kind == "bye":
            break
        else:
            reply = {"type": "error", "message": f"unexpected {kind}"}
        out.write(json.dumps(reply) + "\n")
        out.flush()


if __name__ == "__main__":
    main()
