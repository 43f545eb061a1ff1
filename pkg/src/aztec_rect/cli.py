"""Command-line interface: configuration, commands, persistence, plots.

Commands delegate to the library modules and write diff-able text
artifacts: JSON for configs and reports, CSV for grids and curves, JSONL
for sample streams, SVG for figures.  Every file carries a schema_version
marker.  Floats are written with 17 significant digits.

Exit codes: 1 usage, 2 validation, 3 numerical failure, 4 guard exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import frozen as frozen_mod
from . import fluct as fluct_mod
from .combinatorics import (
    DomainSpec,
    SignatureSequence,
    dominoes_from_vgrid,
    enumerate_tilings,
    omega_from_segments,
    omega_from_theta,
    paths_from_vgrid,
    sequence_to_vgrid,
)
from .errors import GuardError, NumericalError
from .limitshape import SegmentMeasure, density
from .sampler import SamplerConfig, count_tilings, sample_batch

SCHEMA_VERSION = 1

EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_GUARD = 4


def fmt(x: float) -> str:
    return format(float(x), ".17g")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise SystemExit(EXIT_USAGE)


@dataclass
class RunConfig:
    """Resolved run configuration (JSON file merged with CLI flags)."""

    omega_positions: tuple[int, ...] | None = None
    segments: tuple[tuple[float, float], ...] | None = None
    theta: int | None = None
    n: int | None = None
    q: Fraction = Fraction(1)
    seed: int = 0
    samples: int = 1
    grid: tuple[int, int] = (100, 100)
    mode: str = "exact"
    out: Path = Path(".")
    kappa: float = 0.5
    kappa1: float = 0.5
    j1: int = 1
    kappa2: float = 0.5
    j2: int = 1
    anchor: int | None = None
    offsets: tuple[int, ...] = (0,)
    sample_index: int = 0
    resolution: int = 800
    overlay: bool = False
    paths: bool = False

    @property
    def measure(self) -> SegmentMeasure:
        if self.segments is not None:
            return SegmentMeasure.from_segments(self.segments)
        if self.theta is not None:
            return SegmentMeasure.uniform_theta(self.theta)
        raise ValueError("this command needs an asymptotic domain "
                         "(segments or theta)")

    @property
    def domain(self) -> DomainSpec:
        if self.omega_positions is not None:
            return DomainSpec(len(self.omega_positions), self.omega_positions)
        if self.n is None:
            raise ValueError("finite domain needs omega_positions, or "
                             "segments/theta together with N")
        if self.segments is not None:
            return DomainSpec(self.n, omega_from_segments(self.segments, self.n))
        if self.theta is not None:
            return DomainSpec(self.n, omega_from_theta(self.theta, self.n))
        raise ValueError("no domain specified")

    def sampler_config(self) -> SamplerConfig:
        return SamplerConfig(
            domain=self.domain,
            q=self.q,
            master_seed=self.seed,
            num_samples=self.samples,
            arithmetic_mode=self.mode,
        )


def _load_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        data = json.loads(Path(args.config).read_text())
        dom = data.get("domain", {})
        if "omega_positions" in dom:
            cfg.omega_positions = tuple(int(v) for v in dom["omega_positions"])
        if "segments" in dom:
            cfg.segments = tuple(tuple(float(v) for v in ab) for ab in dom["segments"])
        if "theta" in dom:
            cfg.theta = int(dom["theta"])
        if "N" in dom:
            cfg.n = int(dom["N"])
        for key, cast in (("seed", int), ("samples", int), ("kappa", float),
                          ("kappa1", float), ("j1", int), ("kappa2", float),
                          ("j2", int), ("anchor", int), ("sample_index", int),
                          ("resolution", int)):
            if key in data:
                setattr(cfg, key, cast(data[key]))
        if "q" in data:
            cfg.q = Fraction(str(data["q"]))
        if "grid" in data:
            cfg.grid = (int(data["grid"][0]), int(data["grid"][1]))
        if "mode" in data:
            cfg.mode = str(data["mode"])
        if "out" in data:
            cfg.out = Path(data["out"])
        if "offsets" in data:
            cfg.offsets = tuple(int(v) for v in data["offsets"])
        if "overlay" in data:
            cfg.overlay = bool(data["overlay"])
        if "paths" in data:
            cfg.paths = bool(data["paths"])
    # flag overrides
    if args.seed is not None:
        cfg.seed = args.seed
    if args.samples is not None:
        cfg.samples = args.samples
    if args.q is not None:
        cfg.q = Fraction(args.q)
    if args.out is not None:
        cfg.out = Path(args.out)
    if args.grid is not None:
        w, _, h = args.grid.partition("x")
        cfg.grid = (int(w), int(h))
    if getattr(args, "exact", False):
        cfg.mode = "exact"
    if getattr(args, "float_mode", False):
        cfg.mode = "float"
    for key in ("kappa", "kappa1", "j1", "kappa2", "j2", "anchor",
                "sample_index", "resolution"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "offsets", None):
        cfg.offsets = tuple(int(v) for v in args.offsets.split(","))
    if getattr(args, "overlay", False):
        cfg.overlay = True
    if getattr(args, "paths", False):
        cfg.paths = True
    return cfg


# ---------------------------------------------------------------------------
# writers


def _write_json(path: Path, payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, kind: str, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# schema_version={SCHEMA_VERSION} kind={kind}", ",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) if isinstance(v, float) else str(v)
                              for v in row))
    path.write_text("\n".join(lines) + "\n")


def _write_samples_jsonl(path: Path, cfg: RunConfig,
                         samples: list[SignatureSequence]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    head = {
        "schema_version": SCHEMA_VERSION,
        "kind": "samples",
        "omega_positions": list(cfg.domain.omega_positions),
        "q": str(cfg.q),
        "seed": cfg.seed,
        "mode": cfg.mode,
    }
    lines = [json.dumps(head, sort_keys=True)]
    for i, seq in enumerate(samples):
        lines.append(json.dumps(
            {"index": i, "pairs": [list(sig) for sig in seq.pairs]},
            sort_keys=True, separators=(",", ":")))
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# SVG rendering

_COLORS = {
    ("V", 1): "#ca0020",
    ("V", 0): "#f4a582",
    ("L", 1): "#92c5de",
    ("L", 0): "#0571b0",
}


def _square_center(k: int, slot: int) -> tuple[float, float]:
    x = slot + (0.5 if k % 2 == 1 else 0.0)
    y = (k - 1) / 2.0
    return x, y


def _rot(x: float, y: float) -> tuple[float, float]:
    # 45-degree rotation: diagonal squares become axis-aligned unit squares
    return x + y, y - x


def _render_svg(cfg: RunConfig, seq: SignatureSequence) -> str:
    domain = cfg.domain
    grid = sequence_to_vgrid(seq)
    dominoes = dominoes_from_vgrid(grid, domain)
    # coverage check: each square in exactly one domino
    seen = set()
    for d in dominoes:
        for cell in d:
            assert cell not in seen, "cell covered twice"
            seen.add(cell)
    scale = 12.0
    pts = []
    rects = []
    for (k1, s1), (k2, s2) in dominoes:
        x1, y1 = _square_center(k1, s1)
        x2, y2 = _square_center(k2, s2)
        u1, v1 = _rot(x1, y1)
        u2, v2 = _rot(x2, y2)
        kind = "V" if k1 % 2 == 1 else "L"
        lean = 1 if x2 > x1 else 0
        lo_u, lo_v = min(u1, u2) - 0.5, min(v1, v2) - 0.5
        w = abs(u2 - u1) + 1.0
        h = abs(v2 - v1) + 1.0
        rects.append((lo_u, lo_v, w, h, _COLORS[(kind, lean)]))
        pts.extend([(lo_u, lo_v), (lo_u + w, lo_v + h)])
    min_u = min(p[0] for p in pts)
    max_u = max(p[0] for p in pts)
    min_v = min(p[1] for p in pts)
    max_v = max(p[1] for p in pts)
    width = (max_u - min_u) * scale
    height = (max_v - min_v) * scale

    def to_px(u, v):
        return (u - min_u) * scale, (max_v - v) * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}" viewBox="0 0 {width:.2f} {height:.2f}">',
        f"<!-- schema_version={SCHEMA_VERSION} kind=render -->",
    ]
    for lo_u, lo_v, w, h, color in rects:
        px, py = to_px(lo_u, lo_v + h)
        parts.append(
            f'<rect x="{px:.2f}" y="{py:.2f}" width="{w * scale:.2f}" '
            f'height="{h * scale:.2f}" fill="{color}" stroke="white" '
            f'stroke-width="0.6"/>'
        )
    if cfg.paths:
        for path in paths_from_vgrid(grid):
            coords = []
            for k, slot in path:
                x, y = _square_center(k, slot)
                u, v = _rot(x, y)
                px, py = to_px(u, v)
                coords.append(f"{px:.2f},{py:.2f}")
            parts.append(
                f'<polyline points="{" ".join(coords)}" fill="none" '
                f'stroke="black" stroke-width="1.2"/>'
            )
    if cfg.overlay and cfg.segments is not None:
        n = domain.n
        for seg in frozen_mod.trace_boundary(cfg.measure, float(cfg.q), 1200):
            coords = []
            for chi, kappa in seg:
                u, v = _rot(chi * n, kappa * n)
                px, py = to_px(u, v)
                coords.append(f"{px:.2f},{py:.2f}")
            parts.append(
                f'<polyline points="{" ".join(coords)}" fill="none" '
                f'stroke="black" stroke-width="1.5" stroke-dasharray="4,3"/>'
            )
    parts.append("</svg>")
    return "\n".join(parts)


def _curve_svg(segs: list[list[tuple[float, float]]], box) -> str:
    lo_x, hi_x, lo_y, hi_y = box
    scale = 400.0 / max(hi_x - lo_x, hi_y - lo_y, 1e-9)
    width = (hi_x - lo_x) * scale + 20
    height = (hi_y - lo_y) * scale + 20

    def to_px(x, y):
        return 10 + (x - lo_x) * scale, 10 + (hi_y - y) * scale

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" '
        f'height="{height:.0f}">',
        f"<!-- schema_version={SCHEMA_VERSION} kind=curve -->",
    ]
    for seg in segs:
        coords = " ".join("%.3f,%.3f" % to_px(x, y) for x, y in seg)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="#b2182b" '
            f'stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts)


# ---------------------------------------------------------------------------
# commands


def _cmd_count(cfg: RunConfig) -> int:
    print(count_tilings(cfg.domain))
    return 0


def _cmd_enumerate(cfg: RunConfig) -> int:
    tilings = enumerate_tilings(cfg.domain)
    out = cfg.out / "enumerate.jsonl"
    _write_samples_jsonl(out, cfg, tilings)
    print(f"wrote {len(tilings)} tilings to {out}")
    return 0


def _cmd_sample(cfg: RunConfig) -> int:
    samples = sample_batch(cfg.sampler_config())
    out = cfg.out / "samples.jsonl"
    _write_samples_jsonl(out, cfg, samples)
    print(f"wrote {len(samples)} samples to {out}")
    return 0


def _cmd_density_grid(cfg: RunConfig) -> int:
    measure = cfg.measure
    w, h = cfg.grid
    lo, hi = measure.support_min, measure.support_max
    rows = []
    for iy in range(h):
        kappa = (iy + 0.5) / h
        for ix in range(w):
            chi = lo + (hi - lo) * (ix + 0.5) / w
            dp = density(measure, chi, kappa, float(cfg.q))
            rows.append((float(chi), float(kappa), float(dp.density), dp.phase))
    out = cfg.out / "density_grid.csv"
    _write_csv(out, "density-grid", ["chi", "kappa", "density", "phase"], rows)
    print(f"wrote {len(rows)} grid cells to {out}")
    return 0


def _cmd_frozen_boundary(cfg: RunConfig) -> int:
    measure = cfg.measure
    segs = frozen_mod.trace_boundary(measure, float(cfg.q), cfg.resolution)
    rows = []
    for sid, seg in enumerate(segs):
        for chi, kappa in seg:
            rows.append((sid, float(chi), float(kappa)))
    _write_csv(cfg.out / "frozen_boundary.csv", "frozen-boundary",
               ["segment", "chi", "kappa"], rows)
    box = (measure.support_min, measure.support_max, 0.0, 1.0)
    (cfg.out / "frozen_boundary.svg").write_text(_curve_svg(segs, box))
    print(f"wrote {len(rows)} boundary points to {cfg.out}")
    return 0


def _cmd_dual_curve(cfg: RunConfig) -> int:
    measure = cfg.measure
    pts = []
    for u in np.linspace(-1 + 1e-9, 1 - 1e-9, cfg.resolution):
        theta = u / (1 - abs(u))
        try:
            x, y = frozen_mod.dual_point(measure, theta, float(cfg.q))
        except NumericalError:
            pts.append(None)
            continue
        pts.append((float(theta), float(x), float(y)))
    rows = [p for p in pts if p is not None]
    _write_csv(cfg.out / "dual_curve.csv", "dual-curve",
               ["theta", "x", "y"], rows)
    finite = [(x, y) for _, x, y in rows if abs(x) < 10 and abs(y) < 10]
    segs, cur = [], []
    for p in pts:
        if p is None or abs(p[1]) > 10 or abs(p[2]) > 10:
            if len(cur) > 1:
                segs.append(cur)
            cur = []
        else:
            cur.append((p[1], p[2]))
    if len(cur) > 1:
        segs.append(cur)
    if finite:
        xs = [p[0] for p in finite]
        ys = [p[1] for p in finite]
        box = (min(xs), max(xs), min(ys), max(ys))
        (cfg.out / "dual_curve.svg").write_text(_curve_svg(segs, box))
    print(f"wrote {len(rows)} dual-curve points to {cfg.out}")
    return 0


def _cmd_clt_cov(cfg: RunConfig) -> int:
    measure = cfg.measure
    value = fluct_mod.clt_covariance(
        measure, cfg.kappa1, cfg.j1, cfg.kappa2, cfg.j2
    )
    report = {
        "kind": "clt-cov",
        "kappa1": cfg.kappa1,
        "j1": cfg.j1,
        "kappa2": cfg.kappa2,
        "j2": cfg.j2,
        "q": str(cfg.q),
        "value": value,
        "quadrature": {"eps": 1e-2, "nodes": [1024, 2048],
                       "agreement_tol": "max(1e-7, 1e-4 |value|)"},
    }
    out = cfg.out / "clt_cov.json"
    _write_json(out, report)
    print(f"{value!r} (report: {out})")
    return 0


def _cmd_local_stats(cfg: RunConfig) -> int:
    measure = cfg.measure
    domain = cfg.domain
    samples = sample_batch(cfg.sampler_config())
    anchor = cfg.anchor if cfg.anchor is not None else domain.width // 2
    stats = fluct_mod.local_correlation(
        samples, measure, cfg.kappa, anchor, cfg.offsets, float(cfg.q)
    )
    report = {
        "kind": "local-stats",
        "anchor": anchor,
        "offsets": list(cfg.offsets),
        "kappa": cfg.kappa,
        "empirical": stats.empirical,
        "se": stats.se,
        "predicted": stats.predicted,
        "density": stats.density,
        "num_samples": stats.num_samples,
        "tolerance": "3 standard errors",
    }
    out = cfg.out / "local_stats.json"
    _write_json(out, report)
    print(f"empirical={stats.empirical} predicted={stats.predicted} "
          f"se={stats.se} (report: {out})")
    return 0


def _cmd_render(cfg: RunConfig) -> int:
    seq = sample_batch(cfg.sampler_config(),
                       indices=[cfg.sample_index])[0]
    svg = _render_svg(cfg, seq)
    out = cfg.out / "render.svg"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(svg)
    print(f"wrote {out}")
    return 0


_COMMANDS = {
    "count": _cmd_count,
    "enumerate": _cmd_enumerate,
    "sample": _cmd_sample,
    "density-grid": _cmd_density_grid,
    "frozen-boundary": _cmd_frozen_boundary,
    "dual-curve": _cmd_dual_curve,
    "clt-cov": _cmd_clt_cov,
    "local-stats": _cmd_local_stats,
    "render": _cmd_render,
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="aztec-rect",
                     description="Random domino tilings of rectangular "
                                 "Aztec diamonds: exact sampling and "
                                 "asymptotic analysis.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--samples", type=int, default=None)
        p.add_argument("--q", type=str, default=None)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--grid", type=str, default=None,
                       help="grid size WxH for density-grid")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--exact", action="store_true")
        mode.add_argument("--float", dest="float_mode", action="store_true")
        p.add_argument("--kappa", type=float, default=None)
        p.add_argument("--kappa1", type=float, default=None)
        p.add_argument("--j1", type=int, default=None)
        p.add_argument("--kappa2", type=float, default=None)
        p.add_argument("--j2", type=int, default=None)
        p.add_argument("--anchor", type=int, default=None)
        p.add_argument("--offsets", type=str, default=None,
                       help="comma-separated integer offsets")
        p.add_argument("--sample-index", dest="sample_index", type=int,
                       default=None)
        p.add_argument("--resolution", type=int, default=None)
        p.add_argument("--overlay", action="store_true")
        p.add_argument("--paths", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = _load_config(args)
        return _COMMANDS[args.command](cfg)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except GuardError as exc:
        print(f"guard exceeded: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
