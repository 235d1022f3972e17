"""``pipeline``: headless client that classifies or detects on a live feed."""

from __future__ import annotations

import argparse
import json
import logging
import socket
import sys
import threading
from pathlib import Path

from ..codec import CodecError
from ..frames import Resolution, Rotation
from ..inference import (ClassifierBackend, DetectorBackend, DetectorConfig, DetectorConfigError,
                         ModelFormatError, read_model)
from ..pipeline import DisplaySink, Pipeline, ThreadWorker
from ..wire.protocol import ProtocolError, TruncatedStreamError
from ..wire.transport import ActivationDenied, HandshakeTimeout, connect_session

log = logging.getLogger("pipeline")

EXIT_OK = 0
EXIT_TRANSPORT = 1
EXIT_USAGE = 2
EXIT_DENIED = 3
EXIT_CORRUPT = 4


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pipeline", description="Run inference on a drone feed.")
    ap.add_argument("--connect", required=True, metavar="ADDR")
    ap.add_argument("--key", required=True)
    ap.add_argument("--mode", choices=("classify", "detect"), required=True)
    ap.add_argument("--model", metavar="FILE")
    ap.add_argument("--detector-config", metavar="FILE")
    ap.add_argument("--top-k", type=int, default=3)
    ap.add_argument("--display-res", metavar="WxH")
    ap.add_argument("--rotation", type=int, choices=(0, 90, 180, 270), default=0)
    ap.add_argument("--out", default="results.jsonl")
    ap.add_argument("--stats", default="stats.json")
    ap.add_argument("--duration", type=float, metavar="SECONDS",
                    help="stop after this long (default: run until BYE)")
    ap.add_argument("--dump-frames", metavar="DIR")
    ap.add_argument("--timeout", type=float, default=5.0, help="connect/handshake timeout")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def _load_backend(ap, args):
    if args.top_k < 1:
        ap.error("--top-k must be >= 1")
    try:
        if args.mode == "classify":
            if not args.model:
                ap.error("--model is required in classify mode")
            return ClassifierBackend(read_model(args.model), args.top_k)
        if not args.detector_config:
            ap.error("--detector-config is required in detect mode")
        return DetectorBackend(DetectorConfig.read(args.detector_config))
    except (OSError, ModelFormatError, DetectorConfigError) as exc:
        ap.error(f"cannot load {args.mode} backend: {exc}")


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    backend = _load_backend(ap, args)
    display_res = None
    if args.display_res:
        try:
            display_res = Resolution.parse(args.display_res)
        except ValueError as exc:
            ap.error(f"--display-res: {exc}")
    if args.duration is not None and args.duration <= 0:
        ap.error("--duration must be positive")

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out = open(out_path, "w", encoding="utf-8")

    def write_result(result):
        out.write(json.dumps(result.to_record()) + "\n")
        out.flush()

    worker = ThreadWorker()
    pipe = Pipeline(backend, worker=worker, display=DisplaySink(args.dump_frames),
                    display_res=display_res, rotation=Rotation(args.rotation), on_result=write_result)
    pipe.keep_results = False
    status = EXIT_OK
    try:
        try:
            conn = connect_session(args.connect, args.key, timeout=args.timeout)
        except ActivationDenied as exc:
            print(f"pipeline: {exc}", file=sys.stderr)
            return EXIT_DENIED
        except ProtocolError as exc:
            print(f"pipeline: handshake corrupted: {exc}", file=sys.stderr)
            return EXIT_CORRUPT
        except (HandshakeTimeout, OSError) as exc:
            print(f"pipeline: cannot connect to {args.connect}: {exc}", file=sys.stderr)
            return EXIT_TRANSPORT
        log.info("connected to %s firmware %s", conn.product_name, conn.firmware)

        expired = threading.Event()
        timer = None
        if args.duration is not None:
            def expire():
                expired.set()
                try:
                    conn._sock.shutdown(socket.SHUT_RDWR)
                except OSError:
                    pass
            timer = threading.Timer(args.duration, expire)
            timer.daemon = True
            timer.start()
        try:
            for enc in conn:
                pipe.on_encoded(enc)
                if expired.is_set():
                    break
        except (ProtocolError, CodecError) as exc:
            if expired.is_set() and isinstance(exc, TruncatedStreamError):
                pass
            else:
                print(f"pipeline: stream corrupted: {exc}", file=sys.stderr)
                status = EXIT_CORRUPT
        except OSError as exc:
            if not expired.is_set():
                print(f"pipeline: transport failed: {exc}", file=sys.stderr)
                status = EXIT_TRANSPORT
        finally:
            if timer is not None:
                timer.cancel()
            conn.close()
        worker.drain()
        Path(args.stats).parent.mkdir(parents=True, exist_ok=True)
        Path(args.stats).write_text(pipe.report().to_json(indent=2) + "\n", encoding="utf-8")
        snap = pipe.stats_snapshot()
        log.info("received=%d processed=%d dropped=%d", snap.received, snap.processed, snap.dropped)
        return status
    finally:
        worker.drain()
        out.close()


if __name__ == "__main__":
    sys.exit(main())
