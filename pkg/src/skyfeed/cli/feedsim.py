"""``feedsim``: simulated UAV video feed server."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from ..colorspace import rgb_to_yuv_frame
from ..frames import DimensionError
from ..ppm import PpmError, read_ppm
from ..scene import SceneSpecError, SyntheticSceneSpec, scene_frames
from ..wire.activation import load_allowlist
from ..wire.transport import DEFAULT_FIRMWARE, DEFAULT_PRODUCT, FeedServer, ServerConfig, parse_address

log = logging.getLogger("feedsim")


class UsageError(Exception):
    pass


def load_source(spec: str):
    kind, sep, target = spec.partition(":")
    if not sep or kind not in ("dir", "synthetic"):
        raise UsageError(f"--source must be dir:<path> or synthetic:<spec file>, got {spec!r}")
    if kind == "synthetic":
        try:
            return list(scene_frames(SyntheticSceneSpec.read(target)))
        except (OSError, SceneSpecError, DimensionError) as exc:
            raise UsageError(f"bad synthetic source: {exc}") from None
    paths = sorted(Path(target).glob("*.ppm"))
    if not paths:
        raise UsageError(f"no .ppm files in {target}")
    try:
        images = [read_ppm(p) for p in paths]
    except (OSError, PpmError) as exc:
        raise UsageError(f"bad frame file: {exc}") from None
    if len({img.resolution for img in images}) != 1:
        raise UsageError("constant resolution required across source frames")
    try:
        return [rgb_to_yuv_frame(img, seq=i) for i, img in enumerate(images)]
    except DimensionError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="feedsim", description="Serve a simulated drone video feed.")
    ap.add_argument("--listen", required=True, metavar="ADDR", help="HOST:PORT (port 0 picks one)")
    ap.add_argument("--fps", type=float, default=30.0)
    ap.add_argument("--keyframe-interval", type=int, default=30)
    ap.add_argument("--source", required=True, help="dir:<path of PPM files> or synthetic:<spec file>")
    ap.add_argument("--keys", metavar="FILE", help="allowlist of activation keys")
    ap.add_argument("--product", default=DEFAULT_PRODUCT)
    ap.add_argument("--firmware", default=DEFAULT_FIRMWARE)
    ap.add_argument("--max-sessions", type=int, help="exit after serving this many connections")
    ap.add_argument("--ready-file", metavar="FILE", help="write the bound HOST:PORT here once listening")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    if not args.fps > 0:
        ap.error("--fps must be positive")
    if args.keyframe_interval < 1:
        ap.error("--keyframe-interval must be >= 1")
    if args.max_sessions is not None and args.max_sessions < 1:
        ap.error("--max-sessions must be >= 1")
    try:
        address = parse_address(args.listen)
        frames = load_source(args.source)
        allowlist = load_allowlist(args.keys) if args.keys else None
    except (UsageError, ValueError, OSError) as exc:
        ap.error(str(exc))
    config = ServerConfig(fps=args.fps, keyframe_interval=args.keyframe_interval,
                          allowlist=allowlist, product_name=args.product, firmware=args.firmware)
    try:
        server = FeedServer(address, lambda: iter(frames), config, max_sessions=args.max_sessions)
    except OSError as exc:
        print(f"feedsim: cannot listen on {args.listen}: {exc}", file=sys.stderr)
        return 1
    host, port = server.address
    log.info("serving %d frames at %s:%d", len(frames), host, port)
    if args.ready_file:
        tmp = Path(args.ready_file + ".tmp")
        tmp.write_text(f"{host}:{port}\n")
        tmp.replace(args.ready_file)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    for s in server.summaries:
        log.info("session %s accepted=%s frames=%d bytes=%d error=%s",
                 s.peer, s.accepted, s.frames_sent, s.bytes_written, s.error)
    return 0


if __name__ == "__main__":
    sys.exit(main())
