#!/usr/bin/env python3
"""First-fit reimplementation over the wire, for protocol round-trip checks.

Queued jobs in (priority desc, arrival asc, id asc) order; each placed on the
first up node in ascending id order with enough free capacity, else delayed.
Assumes snapshots without data sources or tier/zone constraints.
"""
import json
import sys


def decide(snapshot):
    free = {}
    for node in snapshot["nodes"]:
        if not node["up"]:
            continue
        free[node["id"]] = [node["cpu_m"], node["mem_mib"], node["storage_gib"]]
    for job in snapshot["jobs"]:
        if job["phase"] in ("transferring", "running"):
            f = free.get(job["node"])
            if f:
                f[0] -= job["spec"]["cpu_m"]
                f[1] -= job["spec"]["mem_mib"]
                f[2] -= job["spec"]["storage_gib"]

    queued = [j for j in snapshot["jobs"] if j["phase"] == "queued"]
    queued.sort(key=lambda j: (-j["spec"].get("priority", 0),
                               j["spec"]["arrival_ms"], j["spec"]["id"]))
    decisions = []
    for job in queued:
        spec = job["spec"]
        demand = [spec["cpu_m"], spec["mem_mib"], spec["storage_gib"]]
        for node_id in sorted(free):
            f = free[node_id]
            if all(d <= avail for d, avail in zip(demand, f)):
                decisions.append({"kind": "place", "job": spec["id"], "node": node_id})
                for i in range(3):
                    f[i] -= demand[i]
                break
        else:
            decisions.append({"kind": "delay", "job": spec["id"]})
    return decisions


def main():
    hello = json.loads(sys.stdin.readline())
    print(json.dumps({"type": "hello", "protocol": hello["protocol"]}), flush=True)
    for line in sys.stdin:
        request = json.loads(line)
        decisions = decide(request["snapshot"])
        print(json.dumps({"type": "decisions", "decisions": decisions}), flush=True)


if __name__ == "__main__":
    main()
