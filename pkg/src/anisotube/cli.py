"""Command-line front end: profile / content / verify / gasket-exact.

Exit codes: 0 all verdicts hold, 1 violation, 2 inconclusive within error
budget, 3+ usage or configuration error.  All randomness flows from --seed;
outputs are written atomically and are byte-identical for any --threads.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import asdict, dataclass

import numpy as np

from .bodies import body_from_spec
from .contents import (
    KIND_MINKOWSKI,
    KIND_OUTER,
    KIND_SCONTENT,
    content_estimate,
    dimension_estimate,
    gasket_reports,
    inequality_ledger,
    kappa_monotonic,
    kneser_check,
    standard_reports,
    unit_ball_volume,
)
from .errors import AnisotubeError
from .exact import GasketLimits, GasketProfile, gasket_content_limits
from .field import distance_field, dyadic_radii, grid_for, volume_profile
from .sets import dimension_of, set_from_spec

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 3

_KINDS = {
    "minkowski": KIND_MINKOWSKI,
    "outer": KIND_OUTER,
    "s": KIND_SCONTENT,
}


@dataclass
class JobConfig:
    """One pipeline job; everything except ``threads`` identifies the outputs."""

    set_spec: str = "point"
    body_spec: str = "square"
    grid_h: float | None = None
    pad: float | None = None
    r_min: float = 0.05
    r_max: float = 0.4
    per_octave: int = 4
    s_values: tuple = ()
    kind: str | None = None
    normalize: str = "none"
    seed: int = 0
    out: str | None = None
    threads: int = 1

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("threads")  # execution detail, not part of the job identity
        d["s_values"] = list(self.s_values)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "JobConfig":
        d = dict(d)
        d["s_values"] = tuple(d.get("s_values", ()))
        d.setdefault("threads", 1)
        return cls(**d)


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".anisotube-")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _finite(obj):
    """Replace non-finite floats so the JSON stays RFC-compliant."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    return obj


def _json_text(obj) -> str:
    return json.dumps(_finite(obj), sort_keys=True, indent=2) + "\n"


def _profile_csv(profile) -> str:
    lines = ["r,V,S,kappa,err_budget"]
    for i in range(len(profile.radii)):
        lines.append(",".join(
            format(v, ".17g")
            for v in (profile.radii[i], profile.volume[i], profile.rate[i],
                      profile.kappa[i], profile.err_budget[i])
        ))
    return "\r\n".join(lines) + "\r\n"


def _build_profile(cfg: JobConfig):
    body = body_from_spec(cfg.body_spec)
    cset = set_from_spec(cfg.set_spec)
    n = dimension_of(cset)
    for s in cfg.s_values:
        if not 0.0 <= s <= n:
            raise AnisotubeError(f"--s {s} outside [0, {n}]")
    h = cfg.grid_h if cfg.grid_h else cfg.r_min * body.inradius / 8.0
    if cfg.pad is not None:
        if cfg.pad < cfg.r_max * body.outradius:
            raise AnisotubeError(
                f"--pad {cfg.pad} is below r_max*outradius = {cfg.r_max * body.outradius:.6g}"
            )
        from .field import Grid
        from .sets import bounding_box

        lo, hi = bounding_box(cset)
        origin = lo - cfg.pad
        shape = tuple(int(np.ceil(v)) for v in (hi + cfg.pad - origin) / h)
        grid = Grid(origin=origin, h=h, shape=shape, r_max=cfg.r_max)
    else:
        grid = grid_for(cset, body, cfg.r_max, h)
    fld = distance_field(cset, body, grid, workers=cfg.threads)
    radii = dyadic_radii(cfg.r_min, cfg.r_max, cfg.per_octave)
    prof = volume_profile(fld, radii)
    return body, cset, fld, prof


def _metadata(cfg: JobConfig, prof) -> dict:
    return {
        "config": cfg.to_dict(),
        "set": prof.set_desc,
        "body": prof.body_desc,
        "grid": prof.meta,
        "n": prof.n,
        "v0": prof.v0,
        "body_volume": prof.body_volume,
    }


def cmd_profile(cfg: JobConfig, dump_field: bool = False) -> int:
    _, _, fld, prof = _build_profile(cfg)
    out = cfg.out or "profile"
    _atomic_write(out + ".csv", _profile_csv(prof))
    _atomic_write(out + ".meta.json", _json_text(_metadata(cfg, prof)))
    if dump_field:
        fld.dump(out + ".field.bin")
    print(f"wrote {out}.csv ({len(prof.radii)} radii) and {out}.meta.json")
    return EXIT_OK


def cmd_content(cfg: JobConfig) -> int:
    body, _, _, prof = _build_profile(cfg)
    n = prof.n
    s_values = cfg.s_values or (n - 1.0,)
    results = []
    worst = EXIT_OK
    for s in s_values:
        norm = 1.0
        norm_info = {"mode": cfg.normalize}
        if cfg.normalize == "omega":
            norm = 1.0 / unit_ball_volume(n - s)
            norm_info["unit_ball"] = unit_ball_volume(n - s)
            norm_info["gamma_full"] = unit_ball_volume(n - s, "gamma_full")
        if cfg.kind:
            reports = [content_estimate(prof, s, _KINDS[cfg.kind], normalization=norm)]
            verdicts = None
        else:
            plain = standard_reports(prof, s)
            verdicts = inequality_ledger(plain)  # inequalities are checked unnormalized
            reports = (
                plain if norm == 1.0
                else [content_estimate(prof, rep.s, rep.kind, normalization=norm) for rep in plain]
            )
            worst = max(worst, {"holds": EXIT_OK, "inconclusive": EXIT_INCONCLUSIVE,
                                "violated": EXIT_VIOLATED}[verdicts["overall"]])
        results.append({
            "s": s,
            "normalization": norm_info,
            "reports": [rep.as_dict() for rep in reports],
            "verdicts": verdicts,
        })
    payload = {"meta": _metadata(cfg, prof), "results": results,
               "dimension": dimension_estimate(prof).as_dict() if len(prof.radii) >= 6 else None}
    text = _json_text(payload)
    if cfg.out:
        _atomic_write(cfg.out + ".content.json", text)
        print(f"wrote {cfg.out}.content.json")
    else:
        sys.stdout.write(text)
    return worst


def cmd_verify(cfg: JobConfig, negative_control: bool = False) -> int:
    body, _, fld, prof = _build_profile(cfg)
    n = prof.n
    tol = 4.0 * float(prof.err_budget.max())
    volume_fn = fld.volume_at
    if negative_control:
        mid = math.sqrt(cfg.r_min * cfg.r_max)
        step = 0.5 * float(prof.volume[-1])

        def volume_fn(r, _inner=fld.volume_at):  # deliberately broken volume
            r = np.asarray(r, dtype=float)
            return _inner(r) + step * (r > mid)

    kneser = kneser_check(volume_fn, n, (cfg.r_min, cfg.r_max),
                          trials=1000, seed=cfg.seed, tol=tol)
    kappa = kappa_monotonic(prof)
    s_values = cfg.s_values or (n - 1.0,)
    ledgers = {}
    worst = "holds"
    for s in s_values:
        led = inequality_ledger(standard_reports(prof, s))
        ledgers[f"s={s:g}"] = led
        if led["overall"] == "violated" or (led["overall"] == "inconclusive" and worst == "holds"):
            worst = led["overall"]
    if not kneser.passed or not kappa["passed"]:
        worst = "violated"
    payload = {
        "meta": _metadata(cfg, prof),
        "kneser": kneser.as_dict(),
        "kappa_monotonic": kappa,
        "ledgers": ledgers,
        "overall": worst,
    }
    text = _json_text(payload)
    if cfg.out:
        _atomic_write(cfg.out + ".verify.json", text)
    else:
        sys.stdout.write(text)
    return {"holds": EXIT_OK, "inconclusive": EXIT_INCONCLUSIVE, "violated": EXIT_VIOLATED}[worst]


def cmd_gasket_exact(cfg: JobConfig) -> int:
    body = body_from_spec(cfg.body_spec)
    gp = GasketProfile(body)
    limits: GasketLimits = gasket_content_limits(gp)
    payload = {
        "body": body.descriptor(),
        "support_sum_out": gp.support_sum_out,
        "body_volume": gp.body_volume,
        "similarity_dim": gp.similarity_dim,
        "limits": limits.as_dict(),
        "coefficients": dict(zip(
            ("s_lower", "m_lower", "m_upper", "s_upper"), limits.coefficients())),
        "ledger": inequality_ledger(gasket_reports(limits, body)),
    }
    text = _json_text(payload)
    if cfg.out:
        _atomic_write(cfg.out + ".gasket.json", text)
        print(f"wrote {cfg.out}.gasket.json")
    else:
        sys.stdout.write(text)
    if cfg.r_min and cfg.r_max and cfg.out:
        radii = dyadic_radii(cfg.r_min, cfg.r_max, cfg.per_octave)
        lines = ["r,V_exact,S_exact"]
        for r in radii:
            lines.append(",".join(format(v, ".17g") for v in (r, gp.volume(r), gp.rate(r))))
        _atomic_write(cfg.out + ".gasket.csv", "\r\n".join(lines) + "\r\n")
        print(f"wrote {cfg.out}.gasket.csv")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors must exit above 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(EXIT_USAGE)


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--set", dest="set_spec", default="point",
                   help="set spec: JSON, or point|gasket:<k>|filled-square|filled-triangle|triangle-boundary")
    p.add_argument("--body", dest="body_spec", default="square",
                   help="body spec: JSON, or square|triangle|cross|disk<k>")
    p.add_argument("--grid-h", dest="grid_h", type=float, default=None, help="grid cell size")
    p.add_argument("--pad", type=float, default=None, help="grid padding override (>= r_max*outradius)")
    p.add_argument("--rmin", dest="r_min", type=float, default=0.05)
    p.add_argument("--rmax", dest="r_max", type=float, default=0.4)
    p.add_argument("--per-octave", dest="per_octave", type=int, default=4,
                   help="radii per dyadic octave")
    p.add_argument("--s", dest="s_values", type=float, action="append", default=None,
                   help="content exponent (repeatable)")
    p.add_argument("--kind", choices=sorted(_KINDS), default=None)
    p.add_argument("--normalize", choices=("none", "omega"), default="none")
    p.add_argument("--out", default=None, help="output path prefix")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int,
                   default=int(os.environ.get("ANISO_THREADS", "1")))


def _config(args) -> JobConfig:
    return JobConfig(
        set_spec=args.set_spec,
        body_spec=args.body_spec,
        grid_h=args.grid_h,
        pad=args.pad,
        r_min=args.r_min,
        r_max=args.r_max,
        per_octave=args.per_octave,
        s_values=tuple(args.s_values or ()),
        kind=args.kind,
        normalize=args.normalize,
        seed=args.seed,
        out=args.out,
        threads=args.threads,
    )


def main(argv=None) -> int:
    parser = _Parser(prog="anisotube",
                     description="anisotropic tube volumes, contents and dimension estimates")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("profile", "write the (r, V, S, kappa) table as CSV"),
        ("content", "content envelope reports and inequality verdicts as JSON"),
        ("verify", "run the Kneser / monotonicity / inequality suite"),
        ("gasket-exact", "exact gasket limits and piecewise profile"),
    ):
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "verify":
            p.add_argument("--negative-control", action="store_true",
                           help="corrupt the volume function; the suite must flag it")
        if name == "profile":
            p.add_argument("--dump-field", action="store_true",
                           help="also write the raw distance field (JSON header + float64)")
    args = parser.parse_args(argv)
    cfg = _config(args)
    try:
        if args.command == "profile":
            return cmd_profile(cfg, dump_field=getattr(args, "dump_field", False))
        if args.command == "content":
            return cmd_content(cfg)
        if args.command == "verify":
            return cmd_verify(cfg, negative_control=args.negative_control)
        if args.command == "gasket-exact":
            return cmd_gasket_exact(cfg)
    except (AnisotubeError, KeyError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
