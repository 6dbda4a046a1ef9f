#!/usr/bin/env python3
"""Protocol echo agent: valid handshake, then empty decision lists.

With --tcp PORT it serves one connection over TCP instead of stdio.
"""
import json
import socket
import sys


def serve(rfile, wfile):
    hello = json.loads(rfile.readline())
    assert hello["type"] == "hello"
    wfile.write(json.dumps({"type": "hello", "protocol": hello["protocol"]}) + "\n")
    wfile.flush()
    for line in rfile:
        request = json.loads(line)
        if request.get("type") != "decide":
            continue
        wfile.write(json.dumps({"type": "decisions", "decisions": []}) + "\n")
        wfile.flush()


def main():
    if len(sys.argv) >= 3 and sys.argv[1] == "--tcp":
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        listener.bind(("127.0.0.1", int(sys.argv[2])))
        listener.listen(1)
        conn, _ = listener.accept()
        with conn.makefile("r") as rfile, conn.makefile("w") as wfile:
            serve(rfile, wfile)
    else:
        serve(sys.stdin, sys.stdout)


if __name__ == "__main__":
    main()
