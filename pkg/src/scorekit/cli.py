"""Command-line interface: ``scorekit <command> ...``.

Every command writes its outputs plus a ``run.json`` record into ``--out``
and exits 0 on success. Exit codes: 2 usage, 3 unreadable input,
4 domain error, 5 predictor failure (partial outputs, failures listed).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .corpus import NOISE_KINDS, CorpusError, CorpusManifest, build_mixture, inject
from .diffusion import AnalyticGaussPredictor, ScoreConfig, sample, score_regenerate, sdedit
from .errors import ContractViolation, DataIntegrityError, DomainError, ImageReadError, ScoreError
from .grid import RngStream, gaussian_field
from .imageio import atomic_write_bytes, list_images, read_image, read_images, write_image
from .metrics import compare_profiles, psnr
from .plotting import plot_eval, plot_snr, plot_spectra
from .protocol import DEFAULT_TIMEOUT, ExternalPredictor, ProtocolError
from .schedule import alpha_bar_inverse, crossover_alpha_bar, make_schedule
from .spectral import (MAX_RADIUS, PowerLawSpectrum, SpectrumProfile, corpus_profile,
                       profile_from_spectrum, snr_at_frequency)

log = logging.getLogger("scorekit")

EXIT_OK, EXIT_ERROR, EXIT_USAGE, EXIT_INPUT, EXIT_DOMAIN, EXIT_PREDICTOR = 0, 1, 2, 3, 4, 5

DEFAULTS = {
    "seed": 0,
    "bins": None,
    "schedule.kind": "linear",
    "schedule.T": 1000,
    "schedule.beta_start": 1e-4,
    "schedule.beta_end": 0.02,
    "predictor": "analytic",
    "endpoint": None,
    "timeout": DEFAULT_TIMEOUT,
    "model.spectrum": None,
    "model.power_law": None,
    "model.noise_sigma": 0.0,
    "f_cutoff": None,
    "t_prime": None,
    "format": "scr",
    "clamp": False,
    "jobs": 1,
}

# flag dest -> config key
FLAG_KEYS = {
    "seed": "seed", "bins": "bins", "schedule_kind": "schedule.kind", "T": "schedule.T",
    "beta_start": "schedule.beta_start", "beta_end": "schedule.beta_end",
    "predictor": "predictor", "endpoint": "endpoint", "timeout": "timeout",
    "model_spectrum": "model.spectrum", "power_law": "model.power_law",
    "model_noise_sigma": "model.noise_sigma", "f_cutoff": "f_cutoff", "t_prime": "t_prime",
    "format": "format", "clamp": "clamp", "jobs": "jobs",
}


class UsageError(ScoreError):
    pass


class PredictorFailures(ScoreError):
    pass


def _flatten(d, prefix=""):
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def resolve_config(args) -> dict:
    """Defaults, overridden by the config file, overridden by explicit flags."""
    cfg = dict(DEFAULTS)
    if getattr(args, "config", None):
        try:
            loaded = yaml.safe_load(Path(args.config).read_text()) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise UsageError(f"config {args.config} must be a mapping")
        flat = _flatten(loaded)
        unknown = sorted(set(flat) - set(DEFAULTS))
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(flat)
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            cfg[key] = value
    if isinstance(cfg["model.power_law"], str):
        cfg["model.power_law"] = _parse_floats(cfg["model.power_law"], 3, "--power-law")
    return cfg


def _parse_floats(text, n, flag):
    try:
        vals = [float(v) for v in str(text).split(",")]
    except ValueError:
        vals = []
    if len(vals) != n:
        raise UsageError(f"{flag} expects {n} comma-separated numbers, got {text!r}")
    return vals


def _parse_size(text):
    try:
        h, w = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"size must look like 32x32, got {text!r}")
    return h, w


def schedule_from(cfg):
    return make_schedule(cfg["schedule.kind"], int(cfg["schedule.T"]),
                         float(cfg["schedule.beta_start"]), float(cfg["schedule.beta_end"]))


def model_spectrum_from(cfg):
    """Clean model spectrum plus optional flat noise floor (byte-scale sigma)."""
    sigma = float(cfg["model.noise_sigma"] or 0.0)
    extra = (2.0 * sigma / 255.0) ** 2
    if cfg["model.spectrum"]:
        prof = SpectrumProfile.from_csv(cfg["model.spectrum"])
        if extra:
            prof = SpectrumProfile(prof.freq, prof.power + extra, prof.count)
        return prof
    if cfg["model.power_law"]:
        a, off, exp = cfg["model.power_law"]
        return PowerLawSpectrum(a, off, exp).plus_white(extra)
    raise UsageError("the analytic predictor needs --model-spectrum or --power-law")


def predictor_from(cfg, schedule):
    if cfg["predictor"] == "external":
        if not cfg["endpoint"]:
            raise UsageError("--predictor external requires --endpoint")
        return ExternalPredictor(cfg["endpoint"], float(cfg["timeout"]))
    if cfg["predictor"] != "analytic":
        raise UsageError(f"unknown predictor {cfg['predictor']!r}")
    return AnalyticGaussPredictor(model_spectrum_from(cfg), schedule)


class Run:
    """Collects outputs and failures and writes the run record."""

    def __init__(self, command, out, cfg):
        self.command = command
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.cfg = cfg
        self.outputs = []
        self.failures = []
        self.start = time.perf_counter()
        self.extra = {}

    def path(self, name):
        p = self.out / name
        p.parent.mkdir(parents=True, exist_ok=True)
        self.outputs.append(str(Path(name)))
        return p

    def write_text(self, name, text):
        atomic_write_bytes(self.path(name), text.encode())

    def finish(self):
        record = {
            "command": self.command,
            "tool_version": __version__,
            "config": self.cfg,
            "outputs": sorted(self.outputs),
            "failures": self.failures,
            **self.extra,
            "duration_s": round(time.perf_counter() - self.start, 6),
        }
        atomic_write_bytes(self.out / "run.json",
                           (json.dumps(record, indent=2, sort_keys=False, default=str) + "\n").encode())
        if self.failures:
            raise PredictorFailures(f"{len(self.failures)} image(s) failed; see {self.out / 'run.json'}")


def _map(fn, items, jobs):
    if jobs <= 1:
        return [fn(i) for i in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def _load_dir(directory):
    paths = list_images(directory)
    if not paths:
        raise UsageError(f"no images found in {directory}")
    images, errors = read_images(paths)
    if errors:
        raise errors[0]
    return paths, images


def _guarded(run, name, fn):
    """Run one image's work, turning predictor failures into failure records."""
    try:
        return fn()
    except (ProtocolError, ContractViolation) as exc:
        run.failures.append({"image": name, "timestep": getattr(exc, "timestep", None),
                             "error": f"{type(exc).__name__}: {exc}"})
        return None


def _write_outputs(run, cfg, names, results, subdir=""):
    for name, img in zip(names, results):
        if img is not None:
            write_image(run.path(f"{subdir}{name}.{cfg['format']}"), img, clamp=cfg["clamp"])


def _digest_images(images):
    h = hashlib.sha256()
    for im in images:
        h.update(np.ascontiguousarray(im, dtype="<f8").tobytes())
    return h.hexdigest()[:16]


# commands -----------------------------------------------------------------

def cmd_spectrum(args, cfg):
    run = Run("spectrum", args.out, cfg)
    profiles = {}
    if args.manifest:
        manifest = CorpusManifest.load(args.manifest)
        images, errors = read_images(manifest.paths())
        if errors:
            raise errors[0]
        if not images:
            raise UsageError("manifest lists no images")
        clean = [im for (role, _), im in zip(manifest.entries, images) if role == "clean"]
        full = corpus_profile(images, cfg["bins"])
        profiles["full corpus"] = full
        run.write_text("spectrum.csv", full.to_csv_text())
        if clean:
            p0 = corpus_profile(clean, cfg["bins"])
            profiles["clean subset"] = p0
            run.write_text("p0.csv", p0.to_csv_text())
        else:
            log.warning("manifest has no clean entries; P0 falls back to the full corpus")
            run.write_text("p0.csv", full.to_csv_text())
        run.extra["corpus_digest"] = _digest_images(images)
    else:
        if not args.input:
            raise UsageError("spectrum needs an input directory or --manifest")
        _, images = _load_dir(args.input)
        full = corpus_profile(images, cfg["bins"])
        profiles["corpus"] = full
        run.write_text("spectrum.csv", full.to_csv_text())
        run.extra["corpus_digest"] = _digest_images(images)
        log.warning("no manifest labels a clean subset; treat spectrum.csv as P0 of the full corpus")
    run.extra["n_images"] = len(images)
    if not args.no_plot:
        plot_spectra(profiles, run.path("spectrum.png"))
    run.finish()
    print(f"wrote {args.out}/spectrum.csv ({len(images)} images, {full.bins} bins)")


def _noise_for(p0, pT_path):
    if pT_path in (None, "analytic"):
        return SpectrumProfile(p0.freq, np.ones(p0.bins), p0.count)
    return SpectrumProfile.from_csv(pT_path)


def cmd_solve_tprime(args, cfg):
    if not cfg["f_cutoff"]:
        raise UsageError("solve-tprime needs --f-cutoff")
    sched = schedule_from(cfg)
    p0 = SpectrumProfile.from_csv(args.p0)
    pT = _noise_for(p0, args.pT)
    rows = ["f_cutoff,alpha_bar_target,t_prime,alpha_bar,snr"]
    results = []
    for f in cfg["f_cutoff"]:
        if not 0 <= f <= MAX_RADIUS:
            raise DomainError(f"f_cutoff {f} outside [0, {MAX_RADIUS:.6f}]")
        y = crossover_alpha_bar(p0, pT, f)
        t = sched.T if y <= 0 else alpha_bar_inverse(sched, y)
        snr = snr_at_frequency(sched, t, p0, pT, f) if t > 0 else math.inf
        results.append({"f_cutoff": f, "t_prime": t, "snr": snr})
        rows.append(f"{f:.17g},{y:.17g},{t},{sched.alpha_bar(t):.17g},{snr:.17g}")
        print(f"f_cutoff={f:g}  t'={t}  SNR(t', f_cutoff)={snr:.6g}")
    if args.out:
        run = Run("solve-tprime", args.out, cfg)
        run.write_text("tprime.csv", "\n".join(rows) + "\n")
        run.extra.update(results=results, p0_digest=p0.digest(), pT_digest=pT.digest())
        if not args.no_plot and results[0]["t_prime"] > 0:
            plot_snr(sched, p0, pT, results[0]["f_cutoff"], results[0]["t_prime"],
                     run.path("snr.png"))
        run.finish()


def cmd_inject(args, cfg):
    run = Run("inject", args.out, cfg)
    paths, images = _load_dir(args.input)
    root = RngStream(int(cfg["seed"]))
    for i, (p, im) in enumerate(zip(paths, images)):
        noisy = inject(im, args.kind, root.child("inject", i), args.sigma, args.lam,
                       clamp=cfg["clamp"])
        write_image(run.path(f"{p.stem}.{cfg['format']}"), noisy, clamp=cfg["clamp"])
    run.extra["corpus_digest"] = _digest_images(images)
    run.finish()
    print(f"injected {args.kind} noise into {len(images)} images")


def cmd_mixture(args, cfg):
    run = Run("mixture", args.out, cfg)
    try:
        manifest = build_mixture(args.input, args.out, args.noisy_fraction, args.kind,
                                 int(cfg["seed"]), args.sigma, args.lam, cfg["format"], cfg["clamp"])
    except CorpusError as exc:
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        raise
    run.outputs += [p for role, p in manifest.entries if role == "noisy"] + ["manifest.tsv"]
    run.finish()
    print(f"{len(manifest.paths('noisy'))} noisy / {len(manifest.paths('clean'))} clean")


def _shape(args):
    h, w = args.size
    return (h, w, args.channels)


def cmd_sample(args, cfg):
    sched = schedule_from(cfg)
    pred = predictor_from(cfg, sched)
    run = Run("sample", args.out, cfg)
    root = RngStream(int(cfg["seed"]))
    names = [f"sample_{i:05d}" for i in range(args.n)]

    def work(i):
        return _guarded(run, names[i],
                        lambda: sample(pred, sched, _shape(args), root.child("sample", i)))

    try:
        results = _map(work, range(args.n), int(cfg["jobs"]))
    finally:
        _close(pred)
    _write_outputs(run, cfg, names, results)
    run.finish()
    print(f"generated {sum(r is not None for r in results)} samples")


def _close(pred):
    if hasattr(pred, "close"):
        pred.close()


def cmd_sdedit(args, cfg):
    if cfg["t_prime"] is None:
        raise UsageError("sdedit needs --t-prime")
    sched = schedule_from(cfg)
    pred = predictor_from(cfg, sched)
    run = Run("sdedit", args.out, cfg)
    paths, images = _load_dir(args.input)
    root = RngStream(int(cfg["seed"]))

    def work(i):
        return _guarded(run, paths[i].name,
                        lambda: sdedit(images[i], int(cfg["t_prime"]), pred, sched,
                                       root.child("regenerate", i)))

    try:
        results = _map(work, range(len(images)), int(cfg["jobs"]))
    finally:
        _close(pred)
    _write_outputs(run, cfg, [p.stem for p in paths], results)
    run.finish()


def cmd_score(args, cfg):
    if cfg["f_cutoff"] is None:
        raise UsageError("score needs --f-cutoff")
    f_cutoff = cfg["f_cutoff"][0] if isinstance(cfg["f_cutoff"], list) else cfg["f_cutoff"]
    sched = schedule_from(cfg)
    p0 = pT = None
    if cfg["t_prime"] is None:
        if not args.p0:
            raise UsageError("score needs --p0 (clean spectrum CSV) or --t-prime")
        p0 = SpectrumProfile.from_csv(args.p0)
        pT = _noise_for(p0, args.pT)
    score_cfg = ScoreConfig(f_cutoff=float(f_cutoff), t_prime=cfg["t_prime"], seed=int(cfg["seed"]),
                            clamp=bool(cfg["clamp"])).resolve(sched, p0, pT)
    if score_cfg.t_prime == 0:
        log.warning("derived t' is 0; outputs are the cutoff images")
    pred = predictor_from(cfg, sched)
    run = Run("score", args.out, cfg)
    run.extra["score"] = score_cfg.to_dict()
    root = RngStream(int(cfg["seed"]))
    if args.generate:
        names = [f"sample_{i:05d}" for i in range(args.generate)]

        def source(i):
            return sample(pred, sched, _shape(args), root.child("sample", i))
    else:
        if not args.input:
            raise UsageError("score needs an input directory or --generate N")
        paths, images = _load_dir(args.input)
        names = [p.stem for p in paths]
        run.extra["corpus_digest"] = _digest_images(images)

        def source(i):
            return images[i]

    generated = {}

    def work(i):
        def body():
            x = source(i)
            if args.generate:
                generated[i] = x
            return score_regenerate(x, score_cfg, pred, sched, rng=root.child("regenerate", i))
        return _guarded(run, names[i], body)

    try:
        results = _map(work, range(len(names)), int(cfg["jobs"]))
    finally:
        _close(pred)
    if args.generate:
        _write_outputs(run, cfg, names, [generated.get(i) for i in range(len(names))], "generated/")
    _write_outputs(run, cfg, names, results)
    run.finish()
    print(f"SCoRe(f_cutoff={score_cfg.f_cutoff:g}, t'={score_cfg.t_prime}) "
          f"regenerated {sum(r is not None for r in results)} images")


def _pair_psnr(dir_a, dir_b):
    a = {p.stem: p for p in list_images(dir_a)}
    b = {p.stem: p for p in list_images(dir_b)}
    common = sorted(set(a) & set(b))
    if not common:
        raise UsageError("paired mode found no matching file names")
    values = [psnr(read_image(a[k]), read_image(b[k])) for k in common]
    if all(math.isinf(v) for v in values):
        return math.inf, len(common)
    finite = [v for v in values if not math.isinf(v)]
    return float(np.mean(finite)), len(common)


def cmd_eval(args, cfg):
    if (args.dir_b is None) == (args.profile is None):
        raise UsageError("eval needs exactly one of DIR_B or --profile")
    _, images_a = _load_dir(args.dir_a)
    pa = corpus_profile(images_a, cfg["bins"])
    if args.profile:
        pb = SpectrumProfile.from_csv(args.profile)
        n_b = 0
    else:
        _, images_b = _load_dir(args.dir_b)
        pb = corpus_profile(images_b, cfg["bins"])
        n_b = len(images_b)
    report = compare_profiles(pa, pb, above=args.above, n_a=len(images_a), n_b=n_b)
    if args.paired:
        if args.dir_b is None:
            raise UsageError("--paired needs DIR_B")
        report.psnr, report.n_pairs = _pair_psnr(args.dir_a, args.dir_b)
    run = Run("eval", args.out, cfg)
    run.write_text("eval.csv", report.table_csv())
    summary = report.summary()
    if args.above is not None:
        summary["above"] = args.above
    run.write_text("eval.json", json.dumps(summary, indent=2) + "\n")
    if not args.no_plot:
        plot_eval(report, run.path("eval.png"), labels=(str(args.dir_a), str(args.dir_b or args.profile)))
    run.extra["summary"] = summary
    run.finish()
    line = f"log_spectral_distance={report.distance:.6g}"
    if report.psnr is not None:
        line += f"  psnr_db={summary['psnr_db']}"
    print(line)


def cmd_gen_synthetic(args, cfg):
    if not cfg["model.power_law"]:
        raise UsageError("gen-synthetic needs --power-law A,OFFSET,EXPONENT")
    a, off, exp = cfg["model.power_law"]
    spectrum = PowerLawSpectrum(a, off, exp)
    h, w = args.size
    run = Run("gen-synthetic", args.out, cfg)
    root = RngStream(int(cfg["seed"]))
    for i in range(args.n):
        x = gaussian_field(spectrum, h, w, root.child("field", i), channels=args.channels)
        write_image(run.path(f"field_{i:05d}.{cfg['format']}"), x, clamp=cfg["clamp"])
    expected = profile_from_spectrum(spectrum, h, w, cfg["bins"])
    run.write_text("spectrum.csv", expected.to_csv_text())
    run.finish()
    print(f"wrote {args.n} Gaussian fields of size {h}x{w}")


# parser -------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML/JSON config; flags override it")
    common.add_argument("--seed", type=int)
    common.add_argument("--bins", type=int)
    common.add_argument("--schedule-kind", choices=["linear", "cosine"])
    common.add_argument("--T", type=int)
    common.add_argument("--beta-start", type=float)
    common.add_argument("--beta-end", type=float)
    common.add_argument("--out", required=False, help="output directory")
    common.add_argument("--no-plot", action="store_true", help="skip figure rendering")
    common.add_argument("-v", "--verbose", action="store_true")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--predictor", choices=["analytic", "external"])
    model.add_argument("--endpoint", help="tcp://host:port or exec:<command>")
    model.add_argument("--timeout", type=float, help="seconds per frame")
    model.add_argument("--model-spectrum", help="CSV spectrum for the analytic predictor")
    model.add_argument("--power-law", help="A,OFFSET,EXPONENT of the analytic model spectrum")
    model.add_argument("--model-noise-sigma", type=float,
                       help="byte-scale sigma of white noise the model has learned")
    model.add_argument("--jobs", type=int, help="worker threads across images")

    images = argparse.ArgumentParser(add_help=False)
    images.add_argument("--format", choices=["scr", "png", "pgm"])
    images.add_argument("--clamp", action="store_true", default=None,
                        help="clip outputs to [-1, 1] (needed for byte formats)")

    noise = argparse.ArgumentParser(add_help=False)
    noise.add_argument("--kind", choices=NOISE_KINDS, default="gaussian")
    noise.add_argument("--sigma", type=float, default=25.0, help="byte-scale Gaussian std")
    noise.add_argument("--lam", type=float, default=30.0, help="Poisson rate")

    p = argparse.ArgumentParser(prog="scorekit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("spectrum", parents=[common], help="corpus RAPSD to CSV")
    s.add_argument("input", nargs="?")
    s.add_argument("--manifest")
    s.set_defaults(func=cmd_spectrum, needs_out=True)

    s = sub.add_parser("solve-tprime", parents=[common], help="SDEdit step for a cutoff")
    s.add_argument("--p0", required=True, help="clean spectrum CSV")
    s.add_argument("--pT", help="noise spectrum CSV (default: analytic unit white noise)")
    s.add_argument("--f-cutoff", type=float, nargs="+")
    s.set_defaults(func=cmd_solve_tprime, needs_out=False)

    s = sub.add_parser("inject", parents=[common, images, noise], help="add synthetic noise")
    s.add_argument("input")
    s.set_defaults(func=cmd_inject, needs_out=True)

    s = sub.add_parser("mixture", parents=[common, images, noise], help="clean/noisy corpus")
    s.add_argument("input")
    s.add_argument("--noisy-fraction", type=float, default=0.9)
    s.set_defaults(func=cmd_mixture, needs_out=True)

    s = sub.add_parser("sample", parents=[common, model, images], help="generate from noise")
    s.add_argument("--n", type=int, default=16)
    s.add_argument("--size", type=_parse_size, default=(32, 32))
    s.add_argument("--channels", type=int, choices=[1, 3], default=1)
    s.set_defaults(func=cmd_sample, needs_out=True)

    s = sub.add_parser("sdedit", parents=[common, model, images], help="plain SDEdit")
    s.add_argument("input")
    s.add_argument("--t-prime", type=int)
    s.set_defaults(func=cmd_sdedit, needs_out=True)

    s = sub.add_parser("score", parents=[common, model, images], help="cutoff + regeneration")
    s.add_argument("input", nargs="?")
    s.add_argument("--generate", type=int, metavar="N", help="regenerate N fresh samples")
    s.add_argument("--size", type=_parse_size, default=(32, 32))
    s.add_argument("--channels", type=int, choices=[1, 3], default=1)
    s.add_argument("--f-cutoff", type=float)
    s.add_argument("--t-prime", type=int, help="override the derived step")
    s.add_argument("--p0", help="clean spectrum CSV")
    s.add_argument("--pT", help="noise spectrum CSV (default: analytic)")
    s.set_defaults(func=cmd_score, needs_out=True)

    s = sub.add_parser("eval", parents=[common], help="log-spectral distance report")
    s.add_argument("dir_a")
    s.add_argument("dir_b", nargs="?")
    s.add_argument("--profile", help="reference spectrum CSV instead of DIR_B")
    s.add_argument("--above", type=float, help="only bins entirely above this frequency")
    s.add_argument("--paired", action="store_true", help="also report PSNR over matching names")
    s.set_defaults(func=cmd_eval, needs_out=True)

    s = sub.add_parser("gen-synthetic", parents=[common, images], help="Gaussian-field corpus")
    s.add_argument("--n", type=int, default=64)
    s.add_argument("--size", type=_parse_size, default=(32, 32))
    s.add_argument("--channels", type=int, choices=[1, 3], default=1)
    s.add_argument("--power-law", help="A,OFFSET,EXPONENT")
    s.set_defaults(func=cmd_gen_synthetic, needs_out=True)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        if args.needs_out and not args.out:
            raise UsageError(f"{args.command} needs --out")
        cfg = resolve_config(args)
        if isinstance(cfg["f_cutoff"], (int, float)) and args.command == "solve-tprime":
            cfg["f_cutoff"] = [float(cfg["f_cutoff"])]
        args.func(args, cfg)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ImageReadError, DataIntegrityError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except CorpusError:
        return EXIT_INPUT
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (PredictorFailures, ProtocolError, ContractViolation) as exc:
        print(f"predictor error: {exc}", file=sys.stderr)
        return EXIT_PREDICTOR
    except ScoreError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
