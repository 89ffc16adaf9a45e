"""Command-line interface: ``wavespec {transform,simulate,verify,report,synth}``.

Exit codes: 0 success, 2 validation/format/configuration error,
3 numerical/estimation error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .errors import WavespecError
from .gridio import read_grid, write_grid
from .lws import Smoother, average_spectrum, default_scales, select_scales, standardize
from .manifest import load_manifest, load_spectrum_spec, parse_dims, parse_scales
from .ndwt import Field2D
from .pipeline import PipelineParams, _stage, local_spectrum
from .simulate import simulate
from .wavelets import build_filter, cached_operator
from .workflow import default_jobs, fmt, load_report, verify_manifest, write_report_csvs

logger = logging.getLogger("wavespec")


def _pipeline_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scales", help="retained scales, e.g. 3-8 or 3,4,5 (default: drop 2 finest and 2 coarsest)")
    p.add_argument("--taper", type=int, help="boundary taper width in grid points (default 25)")
    p.add_argument("--dims", help="padded grid size, e.g. 1024x1024 (default: next power of two)")
    p.add_argument("--family", help="wavelet family: haar or d4 (default haar)")
    p.add_argument("--smoother", help="box, box:<half-width>, shrink or none (default box)")
    p.add_argument("--levels", type=int, help="decomposition depth J (default log2 of the smaller padded dim)")


def _params_from_args(args, base: PipelineParams | None = None) -> PipelineParams:
    base = base or PipelineParams()
    changes = {}
    if args.scales:
        changes["scales"] = parse_scales(args.scales)
    if args.taper is not None:
        changes["taper"] = args.taper
    if args.dims:
        changes["dims"] = parse_dims(args.dims)
    if args.family:
        changes["family"] = args.family
    if args.smoother:
        changes["smoother"] = Smoother.parse(args.smoother)
    if args.levels:
        changes["levels"] = args.levels
    return replace(base, **changes)


def cmd_transform(args) -> int:
    params = _params_from_args(args)
    field = read_grid(args.field)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.field).stem
    lws = local_spectrum(field, params)
    avg = _stage("average", average_spectrum, lws, source=str(args.field))
    avg = _stage("select_scales", select_scales, avg, params.scales or default_scales(lws.J))
    raw = avg
    avg = _stage("standardize", standardize, avg)
    path = out / f"{stem}_spectrum.csv"
    with path.open("w") as fh:
        fh.write("scale,direction,energy,raw_energy\n")
        for (s, d), e, r in zip(avg.labels(), avg.energies, raw.energies):
            fh.write(f"{s},{d},{fmt(e)},{fmt(r)}\n")
    print(path)
    if args.local_grids:
        r0, c0 = lws.origin
        nr, nc = lws.region_shape
        for j in range(1, lws.J + 1):
            layers = {"avg": lws.direction_average(j)} if args.direction_average else {
                d: lws.grid(j, d) for d in ("h", "v", "d")
            }
            for name, grid in layers.items():
                sub = Field2D(values=grid[r0 : r0 + nr, c0 : c0 + nc], grid_spacing=field.grid_spacing)
                write_grid(sub, out / f"{stem}_lws_j{j:02d}_{name}.wsg")
    if args.dump_operator:
        op = cached_operator(lws.J, build_filter(params.family).family_name)
        np.savetxt(out / "operator_A.csv", op.entries, delimiter=",", fmt="%.17g")
        np.savetxt(out / "operator_A_inv.csv", op.inverse, delimiter=",", fmt="%.17g")
    return 0


def cmd_simulate(args) -> int:
    spec = load_spectrum_spec(args.spec)
    field = simulate(spec, parse_dims(args.dims), args.seed, build_filter(args.family or "haar"))
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    write_grid(field, args.out)
    print(args.out)
    return 0


def cmd_verify(args) -> int:
    manifest = load_manifest(args.manifest)
    if any(getattr(args, k) is not None for k in ("scales", "taper", "dims", "family", "smoother", "levels")):
        manifest = replace(manifest, pipeline=_params_from_args(args, manifest.pipeline))
    doc = verify_manifest(
        manifest,
        Path(args.out_dir),
        nvecs=parse_scales(args.nvec) if args.nvec else None,
        n_samples=args.nb,
        seed=args.seed,
        jobs=args.jobs or default_jobs(),
    )
    for s in doc["scores"]:
        print(
            f"n_vec={s['n_vec']:2d}  S_ref={s['s_ref']:.3f}  skill_perf={np.mean(s['skill_perf']):.3f}  "
            f"skill_obs={s['skill_obs']:.3f}"
        )
    print(Path(args.out_dir) / "report.json")
    return 0


def cmd_report(args) -> int:
    doc = load_report(args.report)
    out = Path(args.out_dir) if args.out_dir else Path(args.report).parent
    out.mkdir(parents=True, exist_ok=True)
    for p in write_report_csvs(doc, out):
        print(p)
    return 0


def cmd_synth(args) -> int:
    from .synthetic import build_synthetic_dataset

    path = build_synthetic_dataset(
        args.out_dir, n_classes=args.classes, n_members=args.members, dims=parse_dims(args.dims), seed=args.seed
    )
    print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavespec", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("transform", help="averaged bias-corrected spectrum of one field")
    p.add_argument("field", help="grid file (.wsg binary or .csv)")
    _pipeline_args(p)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--local-grids", action="store_true", help="also write per-scale local spectrum grids")
    p.add_argument("--direction-average", action="store_true", help="average local grids over directions")
    p.add_argument("--dump-operator", action="store_true", help="write A and its inverse as CSV")
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("simulate", help="simulate an LS2W field from a spectrum spec")
    p.add_argument("spec", help="YAML spectrum spec")
    p.add_argument("--dims", default="256x256")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--family")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="cross-validated LDA verification of an ensemble manifest")
    p.add_argument("manifest")
    _pipeline_args(p)
    p.add_argument("--nvec", help="LDA subspace sizes, e.g. 1-13")
    p.add_argument("--nb", type=int, help="cross-validation samples (default from manifest, else 50)")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, help="worker processes for per-field transforms")
    p.add_argument("--out-dir", default="wavespec-out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("report", help="re-render CSV outputs from a report.json")
    p.add_argument("report")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("synth", help="write the synthetic 14-class ensemble dataset and manifest")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--classes", type=int, default=14)
    p.add_argument("--members", type=int, default=20)
    p.add_argument("--dims", default="128x128")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except WavespecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
