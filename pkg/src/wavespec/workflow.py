"""End-to-end verification run: manifest -> spectra -> LDA scores -> report files."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .errors import FormatError, WavespecError
from .gridio import read_grid
from .manifest import DatasetManifest
from .pipeline import PipelineParams, field_spectrum
from .verify import ClassedDataset, attribution, cross_validate, max_nvec
from .wavelets import DIRECTIONS

logger = logging.getLogger(__name__)

REPORT_FORMAT = "wavespec-report/1"


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _cache_key(path: Path, params: PipelineParams) -> str:
    h = hashlib.sha256()
    h.update(path.read_bytes())
    h.update(json.dumps(params.to_dict(), sort_keys=True).encode())
    return h.hexdigest()


def _spectrum_job(path: str, params: PipelineParams) -> tuple[list[float], list[int]]:
    avg = field_spectrum(read_grid(path), params, source=path)
    return avg.energies.tolist(), list(avg.scales)


class _FieldError(WavespecError):
    def __init__(self, context: str, cause: WavespecError):
        super().__init__(f"{context}: {cause}")
        self.exit_code = cause.exit_code


def compute_spectra(
    paths: list[Path], params: PipelineParams, cache_dir: Path | None, jobs: int = 1, labels=None
) -> tuple[np.ndarray, tuple[int, ...]]:
    """Standardized spectra for every path, in order, reusing cached results."""
    labels = labels or [str(p) for p in paths]
    results: list = [None] * len(paths)
    keys = [_cache_key(p, params) for p in paths]
    todo = []
    for n, key in enumerate(keys):
        hit = cache_dir / f"{key}.json" if cache_dir else None
        if hit is not None and hit.is_file():
            doc = json.loads(hit.read_text())
            results[n] = (doc["energies"], doc["scales"])
        else:
            todo.append(n)
    if todo:
        logger.info("computing %d spectra (%d cached)", len(todo), len(paths) - len(todo))

        if jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                futures = [(n, pool.submit(_spectrum_job, str(paths[n]), params)) for n in todo]
                for n, fut in futures:
                    try:
                        results[n] = fut.result()
                    except WavespecError as exc:
                        raise _FieldError(labels[n], exc) from exc
        else:
            for n in todo:
                try:
                    results[n] = _spectrum_job(str(paths[n]), params)
                except WavespecError as exc:
                    raise _FieldError(labels[n], exc) from exc
        if cache_dir:
            cache_dir.mkdir(parents=True, exist_ok=True)
            for n in todo:
                doc = {"energies": results[n][0], "scales": results[n][1]}
                (cache_dir / f"{keys[n]}.json").write_text(json.dumps(doc))
    scales = tuple(results[0][1])
    return np.array([r[0] for r in results]), scales


def load_dataset(manifest: DatasetManifest, out_dir: Path | None, jobs: int = 1) -> tuple[ClassedDataset, tuple[int, ...]]:
    paths, labels = [], []
    for c in manifest.classes:
        for m, p in enumerate(c.members):
            paths.append(p)
            labels.append(f"class {c.label!r} member {m + 1} ({p.name})")
        paths.append(c.observation)
        labels.append(f"class {c.label!r} observation ({c.observation.name})")
    cache = out_dir / "cache" if out_dir else None
    spectra, scales = compute_spectra(paths, manifest.pipeline, cache, jobs=jobs, labels=labels)
    n_c, n_e = len(manifest.classes), manifest.n_members
    spectra = spectra.reshape(n_c, n_e + 1, -1)
    data = ClassedDataset(
        members=spectra[:, :n_e],
        observations=spectra[:, n_e],
        labels=tuple(c.label for c in manifest.classes),
        dates=tuple(c.date for c in manifest.classes),
        types=tuple(c.type for c in manifest.classes),
    )
    return data, scales


def run_verification(data: ClassedDataset, nvecs, n_samples: int, seed: int) -> dict:
    """Scores and attribution (with and without leave-class-out) as a JSON-ready dict."""
    nvecs = tuple(nvecs) if nvecs else tuple(range(1, max_nvec(data) + 1))
    report = cross_validate(data, n_samples=n_samples, nvecs=nvecs, seed=seed)
    std = attribution(data, n_samples=n_samples, nvecs=nvecs, seed=seed)
    lco_limit = max_nvec(data, leave_class_out=True)
    lco_nvecs = tuple(n for n in nvecs if n <= lco_limit)
    lco = attribution(data, n_samples=n_samples, nvecs=lco_nvecs, seed=seed, leave_class_out=True) if lco_nvecs else None

    def attr_doc(a):
        if a is None:
            return None
        return {
            "nvecs": list(a.nvecs),
            "posterior_members": a.members.tolist(),
            "posterior_obs": a.observations.tolist(),
            "correct_members": a.correct_members.tolist(),
            "correct_obs": a.correct_obs.tolist(),
        }

    return {
        "nvecs": list(report.nvecs),
        "n_samples": n_samples,
        "seed": seed,
        "holdout": report.holdout.tolist(),
        "scores": [
            {
                "n_vec": s.n_vec,
                "s_ref": s.s_ref,
                "s_perf": s.s_perf.tolist(),
                "s_obs": s.s_obs,
                "skill_perf": s.skill_perf.tolist(),
                "skill_obs": s.skill_obs,
            }
            for s in (report.scores[k] for k in report.nvecs)
        ],
        "loglik_members": report.loglik_members.tolist(),
        "loglik_obs": report.loglik_obs.tolist(),
        "attribution": {"standard": attr_doc(std), "leave_class_out": attr_doc(lco)},
    }


def verify_manifest(
    manifest: DatasetManifest,
    out_dir: Path,
    nvecs=None,
    n_samples: int | None = None,
    seed: int | None = None,
    jobs: int = 1,
    timestamp: str | None = None,
) -> dict:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    data, scales = load_dataset(manifest, out_dir, jobs=jobs)
    nvecs = nvecs or manifest.nvec
    n_samples = n_samples or manifest.nb
    seed = manifest.seed if seed is None else seed
    doc = {
        "format": REPORT_FORMAT,
        "created": timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "manifest": manifest.path.name,
        "params": manifest.pipeline.to_dict(),
        "classes": [{"label": c.label, "date": c.date, "type": c.type} for c in manifest.classes],
        "n_members": data.n_members,
        "scales": list(scales),
        "spectra": {"members": data.members.tolist(), "observations": data.observations.tolist()},
    }
    doc.update(run_verification(data, nvecs, n_samples, seed))
    (out_dir / "report.json").write_text(json.dumps(doc, indent=1))
    write_report_csvs(doc, out_dir)
    return doc


def _write_csv(path: Path, header, rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def write_report_csvs(doc: dict, out_dir) -> list[Path]:
    """Render the delimited outputs of a report dict; returns the files written."""
    out_dir = Path(out_dir)
    labels = [c["label"] for c in doc["classes"]]
    written = []

    def out(name, header, rows):
        p = out_dir / name
        _write_csv(p, header, rows)
        written.append(p)

    rows = []
    for s in doc["scores"]:
        sk = np.asarray(s["skill_perf"])
        q = np.quantile(sk, [0.0, 0.25, 0.5, 0.75, 1.0])
        rows.append(
            [s["n_vec"], fmt(s["s_ref"]), fmt(np.mean(s["s_perf"])), fmt(s["s_obs"]), fmt(sk.mean()), *map(fmt, q), fmt(s["skill_obs"])]
        )
    out(
        "skill_vs_nvec.csv",
        ["n_vec", "s_ref", "s_perf_mean", "s_obs", "skill_perf_mean", "skill_perf_min", "skill_perf_q25",
         "skill_perf_median", "skill_perf_q75", "skill_perf_max", "skill_obs"],
        rows,
    )
    out(
        "skill_perf_samples.csv",
        ["b", "n_vec", "s_perf", "skill_perf"],
        [[b, s["n_vec"], fmt(sp), fmt(v)] for s in doc["scores"] for b, (sp, v) in enumerate(zip(s["s_perf"], s["skill_perf"]))],
    )

    llm = np.asarray(doc["loglik_members"])
    llo = np.asarray(doc["loglik_obs"])
    rows = []
    for b in range(llm.shape[0]):
        for n, nv in enumerate(doc["nvecs"]):
            for i, ci in enumerate(labels):
                for k, ck in enumerate(labels):
                    rows.append([b, nv, ci, ck, "member", fmt(llm[b, n, i, k])])
                    rows.append([b, nv, ci, ck, "observation", fmt(llo[b, n, i, k])])
    out("loglik_box.csv", ["b", "n_vec", "given_class", "data_class", "kind", "loglik"], rows)

    rows = []
    for mode, a in doc["attribution"].items():
        if a is None:
            continue
        cm = np.asarray(a["correct_members"])
        co = np.asarray(a["correct_obs"])
        for n, nv in enumerate(a["nvecs"]):
            q = np.quantile(cm[:, n], [0.0, 0.25, 0.5, 0.75, 1.0])
            rows.append([mode, nv, fmt(cm[:, n].mean()), *map(fmt, q), fmt(co[:, n].mean())])
            for which in ("members", "obs"):
                mat = np.asarray(a[f"posterior_{which}"])[n]
                out(
                    f"posterior_{mode}_{which}_nvec{nv:02d}.csv",
                    ["class", *labels],
                    [[labels[i], *map(fmt, mat[i])] for i in range(len(labels))],
                )
    out(
        "mean_posterior_vs_nvec.csv",
        ["mode", "n_vec", "members_mean", "members_min", "members_q25", "members_median", "members_q75",
         "members_max", "obs_mean"],
        rows,
    )

    rows = []
    scales = doc["scales"]
    comps = [(s, d) for s in scales for d in DIRECTIONS]
    for i, ci in enumerate(labels):
        for m, vec in enumerate(doc["spectra"]["members"][i]):
            rows.extend([ci, f"m{m + 1:02d}", s, d, fmt(v)] for (s, d), v in zip(comps, vec))
        rows.extend([ci, "obs", s, d, fmt(v)] for (s, d), v in zip(comps, doc["spectra"]["observations"][i]))
    out("spectra.csv", ["class", "source", "scale", "direction", "energy"], rows)
    return written


def load_report(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != REPORT_FORMAT:
        raise FormatError(f"{path}: not a {REPORT_FORMAT} file")
    return doc


def default_jobs() -> int:
    return max(1, min(4, os.cpu_count() or 1))
