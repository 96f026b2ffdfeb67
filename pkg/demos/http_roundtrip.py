"""Start the query server on a free port, post a query, and print the answer."""

import json
import urllib.request
from pathlib import Path

from qmt.frontend.server import QueryService, serve_in_thread
from qmt.mmt.library import load_library

HERE = Path(__file__).parent


def main():
    service = QueryService([load_library(HERE / "library.json"), load_library(HERE / "graph.json")])
    server = serve_in_thread(service)
    base = f"http://127.0.0.1:{server.server_address[1]}"
    try:
        with urllib.request.urlopen(base + "/health") as r:
            print(r.read().decode().strip())
        body = json.dumps({"query": "theory"}).encode()
        req = urllib.request.Request(base + "/query", data=body, headers={"Content-Type": "application/json"})
        with urllib.request.urlopen(req) as r:
            print(r.status, r.read().decode())
    finally:
        server.shutdown()
        server.server_close()


if __name__ == "__main__":
    main()
