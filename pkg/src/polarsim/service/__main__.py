"""Run the service with uvicorn: python -m polarsim.service [--port N]."""

import argparse


def main() -> None:
    parser = argparse.ArgumentParser(prog="polarsim.service")
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8321)
    args = parser.parse_args()

    import uvicorn

    uvicorn.run("polarsim.service.app:app", host=args.host, port=args.port)


if __name__ == "__main__":
    main()
