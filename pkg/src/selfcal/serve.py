"""`selfcal-serve`: run the HTTP service with uvicorn.

Bind address comes from SELFCAL_BIND (host:port, default 127.0.0.1:8000);
data directory and external embedder URL from SELFCAL_DATA_DIR and
SELFCAL_EMBEDDER_URL.
"""

from __future__ import annotations

import os


def main() -> int:
    import uvicorn

    bind = os.environ.get("SELFCAL_BIND", "127.0.0.1:8000")
    host, _, port = bind.rpartition(":")
    uvicorn.run("selfcal.service:app", host=host or "127.0.0.1", port=int(port))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
