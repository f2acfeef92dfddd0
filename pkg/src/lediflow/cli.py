"""Command-line interface.

    lediflow [--seed N] [--out DIR] [--config FILE] [--preset NAME] VERB ...

Verbs: ``train {aux,fm,fm-baseline,latent}``, ``generate``, ``inpaint``,
``interp``, ``sweep``, ``export-data``. Global flags may also follow the verb.

Exit codes: 0 success, 1 internal error, 2 missing prerequisite checkpoint,
3 invalid input (config, mask, data files), 4 checkpoint kind mismatch or
corrupt artifact.
"""

from __future__ import annotations

import argparse
import os
import sys
import traceback

import numpy as np

from . import config as cfgmod
from . import io
from .auxprior import AuxModel, encode, reparam_sample, train_auxiliary
from .checkpoint import CheckpointError, Kind, load_model, save_model
from .core import ConditionedRegressor, ContractError, TrainConfig, TrainingAborted, seeded_rng
from .data import make_2d, make_blob_images
from .flowmatch import GaussianPrior, LearnedPrior, train_flow
from .latentflow import train_latent_sampler
from .metrics import sliced_w2, step_sweep, write_plot_script, write_sweep_csv
from .pipeline import (PRESETS, GenerationConfig, generate, generate_from_latent, inpaint,
                       interpolate_latents, perturb_latent)

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_MISSING = 2
EXIT_INVALID = 3
EXIT_MISMATCH = 4

STAGES = ("aux", "fm", "fm-baseline", "latent")

# checkpoint file names inside a run directory
FILES = {
    "aux_encoder": "aux_encoder.ldfw",
    "aux_decoder": "aux_decoder.ldfw",
    "fm": "fm.ldfw",
    "fm-baseline": "fm_baseline.ldfw",
    "latent": "latent.ldfw",
}
_PRIOR_LEARNED = 1.0
_PRIOR_GAUSSIAN = 0.0


class MissingPrerequisite(Exception):
    def __init__(self, stage, path):
        self.stage = stage
        super().__init__(f"missing prerequisite: stage '{stage}' has no checkpoint at {path}; "
                         f"run `lediflow train {stage}` first")


class InvalidInput(Exception):
    pass


# ---------------------------------------------------------------- helpers


def _train_config(section: dict, seed: int) -> TrainConfig:
    return TrainConfig(
        steps=section["steps"], batch_size=section["batch_size"], lr=section["lr"],
        beta1=section["beta1"], beta2=section["beta2"], weight_decay=section["weight_decay"],
        eps=section["eps"], seed=seed, log_every=section["log_every"],
        ema_decay=section.get("ema_decay", 0.0),
    )


def _is_images(cfg) -> bool:
    return cfg["data"]["kind"] == "blobs"


def _dataset(cfg, seed, n=None):
    d = cfg["data"]
    n = n or d["n"]
    if _is_images(cfg):
        return make_blob_images(n, d["side"], seed)
    return make_2d(d["kind"], n, d["noise"], seed)


def _ckpt(dir_, key):
    return os.path.join(dir_, FILES[key])


def _require(dir_, key, stage):
    path = _ckpt(dir_, key)
    if not os.path.exists(path):
        raise MissingPrerequisite(stage, path)
    return path


def _load_aux(dir_) -> AuxModel:
    enc, meta = load_model(_require(dir_, "aux_encoder", "aux"), Kind.ENC)
    dec, _ = load_model(_require(dir_, "aux_decoder", "aux"), Kind.DEC)
    beta = float(meta["beta"][0]) if "beta" in meta else cfgmod.DEFAULTS["aux"]["beta"]
    return AuxModel(enc, dec, beta)


def _load_fm(dir_, learned: bool):
    key = "fm" if learned else "fm-baseline"
    path = _require(dir_, key, key)
    model, meta = load_model(path, Kind.FM)
    found = meta.get("prior", np.array([_PRIOR_LEARNED if model.cond_dim else _PRIOR_GAUSSIAN]))
    want = _PRIOR_LEARNED if learned else _PRIOR_GAUSSIAN
    if float(found[0]) != want:
        raise CheckpointError(f"{path}: flow model was trained with the "
                              f"{'learned' if float(found[0]) else 'gaussian'} prior")
    return model


def _load_lat(dir_):
    model, _ = load_model(_require(dir_, "latent", "latent"), Kind.LAT)
    return model


def _generation_config(args, cfg, seed) -> GenerationConfig:
    g = cfg["generate"]
    base = dict(latent_steps=g["latent_steps"], latent_method=g["latent_method"],
                fm_steps=g["fm_steps"], fm_method=g["fm_method"],
                batch_size=g["batch_size"], seed=seed)
    if args.preset:
        if args.preset not in PRESETS:
            raise InvalidInput(f"unknown preset {args.preset!r}; choose from {sorted(PRESETS)}")
        base.update(PRESETS[args.preset])
    return GenerationConfig(**base)


def _write_samples(out, cfg, samples, prefix):
    """CSV for 2-D data, a PGM directory for images; returns written names."""
    if _is_images(cfg):
        names = io.write_images(os.path.join(out, prefix), samples, cfg["data"]["side"], prefix)
        return [os.path.join(prefix, n) for n in names]
    name = f"{prefix}.csv"
    header = tuple(f"x{i}" for i in range(samples.shape[1])) if samples.shape[1] != 2 else ("x", "y")
    io.write_points_csv(os.path.join(out, name), samples, header)
    return [name]


def _manifest_path(out, verb):
    return os.path.join(out, f"{verb.replace('-', '_')}_manifest.json")


def _snapshot(out, name, cfg):
    with open(os.path.join(out, name), "w") as fh:
        fh.write(cfgmod.dump(cfg))


# ---------------------------------------------------------------- verbs


def cmd_train(args, cfg):
    stage = args.stage
    out = args.out
    ckpts = args.checkpoints or out
    seed = cfg["run"]["seed"]
    stage_seed = seed + cfgmod.SEED_OFFSETS[stage]
    data = _dataset(cfg, seed)
    d = data.shape[1]
    if stage == "aux":
        a = cfg["aux"]
        aux = AuxModel.create(d, a["latent_dim"], a["width"], a["depth"], a["beta"], stage_seed)
        aux, hist = train_auxiliary(aux, data, _train_config(a, stage_seed))
        save_model(_ckpt(out, "aux_encoder"), aux.encoder, Kind.ENC, {"beta": aux.beta})
        save_model(_ckpt(out, "aux_decoder"), aux.decoder, Kind.DEC, {"beta": aux.beta})
        io.write_history_csv(os.path.join(out, "aux_history.csv"), hist, ("step", "loss", "kl", "vgl"))
    elif stage == "fm-baseline":
        f = cfg["fm"]
        model = ConditionedRegressor(d, d, 0, f["width"], f["depth"], seed=stage_seed)
        model, hist = train_flow(model, GaussianPrior(), data, _train_config(f, stage_seed))
        save_model(_ckpt(out, "fm-baseline"), model, Kind.FM, {"prior": _PRIOR_GAUSSIAN})
        io.write_history_csv(os.path.join(out, "fm_baseline_history.csv"), hist)
    else:
        aux = _load_aux(ckpts)
        if aux.data_dim != d:
            raise InvalidInput(f"aux model expects {aux.data_dim}-dim data, config gives {d}")
        if stage == "fm":
            f = cfg["fm"]
            model = ConditionedRegressor(d, d, aux.latent_dim, f["width"], f["depth"],
                                         seed=stage_seed)
            model, hist = train_flow(model, LearnedPrior(aux), data, _train_config(f, stage_seed))
            save_model(_ckpt(out, "fm"), model, Kind.FM, {"prior": _PRIOR_LEARNED})
            io.write_history_csv(os.path.join(out, "fm_history.csv"), hist)
        else:
            s = cfg["latent"]
            k = aux.latent_dim
            model = ConditionedRegressor(k, k, 0, s["width"], s["depth"], seed=stage_seed)
            model, hist = train_latent_sampler(model, aux, data, _train_config(s, stage_seed))
            save_model(_ckpt(out, "latent"), model, Kind.LAT)
            io.write_history_csv(os.path.join(out, "latent_history.csv"), hist)
    _snapshot(out, f"{stage.replace('-', '_')}_config.ini", cfg)
    print(f"trained {stage}: {hist[-1]}" if hist else f"trained {stage}")
    return EXIT_OK


def cmd_generate(args, cfg):
    ckpts = args.checkpoints or args.out
    seed = cfg["run"]["seed"]
    gen = _generation_config(args, cfg, seed)
    baseline = args.baseline or (args.preset or "").startswith("baseline")
    if baseline:
        samples = generate(None, _load_fm(ckpts, learned=False), None, gen)
    else:
        aux = _load_aux(ckpts)
        samples = generate(aux, _load_fm(ckpts, learned=True), _load_lat(ckpts), gen)
    files = _write_samples(args.out, cfg, samples, "samples")
    io.write_manifest(_manifest_path(args.out, "generate"), {
        "command": "generate",
        "mode": "baseline" if baseline else "lediflow",
        "preset": args.preset,
        "seed": seed,
        "generation": gen.as_dict(),
        "count": int(len(samples)),
        "files": files,
    })
    return EXIT_OK


def _read_inputs(path):
    if path.endswith(".pgm"):
        return io.read_pgm(path).reshape(1, -1)
    if os.path.isdir(path):
        names = sorted(n for n in os.listdir(path) if n.endswith(".pgm"))
        if not names:
            raise InvalidInput(f"{path}: no .pgm files")
        return np.stack([io.read_pgm(os.path.join(path, n)).reshape(-1) for n in names])
    return io.read_points_csv(path)


def cmd_inpaint(args, cfg):
    ckpts = args.checkpoints or args.out
    seed = cfg["run"]["seed"]
    aux = _load_aux(ckpts)
    fm = _load_fm(ckpts, learned=True)
    gen = _generation_config(args, cfg, seed)
    try:
        ys = _read_inputs(args.input) if args.input else _dataset(cfg, seed, n=4)
        mask = io.read_mask(args.mask)
    except (OSError, ValueError) as exc:
        raise InvalidInput(str(exc)) from exc
    if ys.ndim != 2 or ys.shape[1] != aux.data_dim:
        raise InvalidInput(f"inputs have dimension {ys.shape[-1]}, model expects {aux.data_dim}")
    if mask.shape != (aux.data_dim,):
        raise InvalidInput(f"mask has {mask.size} entries, expected {aux.data_dim}")
    lat = _load_lat(ckpts) if args.perturb is not None else None
    outs = []
    for i, y in enumerate(ys):
        z = None
        if lat is not None:
            z0 = reparam_sample(encode(aux, y), seeded_rng(seed + i))
            z = perturb_latent(lat, z0, args.perturb, seeded_rng(seed + 7919 + i),
                               cfg["generate"]["invert_steps"])
        outs.append(inpaint(aux, fm, y, mask, GenerationConfig(**{**gen.as_dict(), "seed": seed + i}), z))
    files = _write_samples(args.out, cfg, np.array(outs), "inpainted")
    io.write_manifest(_manifest_path(args.out, "inpaint"), {
        "command": "inpaint",
        "seed": seed,
        "generation": gen.as_dict(),
        "masked": int(mask.sum()),
        "perturb_alpha": args.perturb,
        "count": len(outs),
        "files": files,
    })
    return EXIT_OK


def cmd_interp(args, cfg):
    ckpts = args.checkpoints or args.out
    seed = cfg["run"]["seed"]
    g = cfg["generate"]
    aux = _load_aux(ckpts)
    fm = _load_fm(ckpts, learned=True)
    lat = _load_lat(ckpts)
    gen = _generation_config(args, cfg, seed)
    data = _dataset(cfg, seed)
    i, j = args.pair
    if not (0 <= i < len(data) and 0 <= j < len(data)):
        raise InvalidInput(f"pair indices must lie in [0, {len(data)})")
    rng = seeded_rng(seed)
    z0 = encode(aux, data[i]).mean.astype(np.float64)
    z1 = encode(aux, data[j]).mean.astype(np.float64)
    alphas = np.linspace(0.0, 1.0, g["interp_points"])
    zs = np.stack([interpolate_latents(lat, z0, z1, a, g["interp_mode"], g["invert_steps"])
                   for a in alphas])
    samples = generate_from_latent(aux, fm, zs, gen, rng)
    files = _write_samples(args.out, cfg, samples, "interp")
    io.write_manifest(_manifest_path(args.out, "interp"), {
        "command": "interp",
        "seed": seed,
        "pair": [i, j],
        "mode": g["interp_mode"],
        "alphas": alphas.tolist(),
        "generation": gen.as_dict(),
        "files": files,
    })
    return EXIT_OK


def cmd_sweep(args, cfg):
    ckpts = args.checkpoints or args.out
    seed = cfg["run"]["seed"]
    s = cfg["sweep"]
    gen = _generation_config(args, cfg, seed)
    aux = _load_aux(ckpts)
    fm = _load_fm(ckpts, learned=True)
    lat = _load_lat(ckpts)
    base = _load_fm(ckpts, learned=False)
    reference = _dataset(cfg, seed + s["reference_seed"], n=s["reference_n"])

    def metric(a, b):
        return sliced_w2(a, b, s["projections"], seed=seed)

    def run(learned):
        def gen_at(steps):
            c = GenerationConfig(**{**gen.as_dict(), "fm_steps": steps, "fm_method": s["solver"]})
            return generate(aux, fm, lat, c) if learned else generate(None, base, None, c)
        return gen_at

    rows = []
    for learned, method, prior in ((False, "fm", "gaussian"), (True, "lediflow", "learned")):
        for r in step_sweep(run(learned), reference, s["steps_list"], metric):
            rows.append({"method": method, "prior": prior, "solver": s["solver"], **r})
    write_sweep_csv(os.path.join(args.out, "sweep.csv"), rows)
    write_plot_script(os.path.join(args.out, "sweep.gp"), "sweep.csv")
    io.write_manifest(_manifest_path(args.out, "sweep"), {
        "command": "sweep",
        "seed": seed,
        "generation": gen.as_dict(),
        "sweep": s,
        "files": ["sweep.csv", "sweep.gp"],
    })
    return EXIT_OK


def cmd_export_data(args, cfg):
    seed = cfg["run"]["seed"]
    data = _dataset(cfg, seed)
    files = _write_samples(args.out, cfg, data, "data")
    io.write_manifest(_manifest_path(args.out, "export-data"), {
        "command": "export-data", "seed": seed, "data": cfg["data"], "files": files,
    })
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "generate": cmd_generate,
    "inpaint": cmd_inpaint,
    "interp": cmd_interp,
    "sweep": cmd_sweep,
    "export-data": cmd_export_data,
}


# ---------------------------------------------------------------- parsing


def _add_globals(p, suppress):
    default = argparse.SUPPRESS if suppress else None
    p.add_argument("--seed", type=int, default=default, help="overrides run.seed")
    p.add_argument("--out", default=argparse.SUPPRESS if suppress else ".", help="output directory")
    p.add_argument("--config", default=default, help="config file (defaults apply otherwise)")
    p.add_argument("--preset", default=default, help=f"generation preset: {', '.join(PRESETS)}")
    p.add_argument("--checkpoints", default=default,
                   help="directory holding checkpoints (defaults to --out)")


def build_parser():
    parser = argparse.ArgumentParser(prog="lediflow", description="Flow matching with a learned prior.")
    _add_globals(parser, suppress=False)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("train", help="train one model stage")
    p.add_argument("stage", choices=STAGES)
    _add_globals(p, suppress=True)

    p = sub.add_parser("generate", help="sample from trained models")
    p.add_argument("--baseline", action="store_true", help="use the Gaussian-prior model")
    _add_globals(p, suppress=True)

    p = sub.add_parser("inpaint", help="regenerate masked coordinates")
    p.add_argument("--mask", required=True, help="0/1 text file or PGM (nonzero = generate)")
    p.add_argument("--input", help="CSV of points, a PGM, or a directory of PGMs")
    p.add_argument("--perturb", type=float, default=None, metavar="ALPHA",
                   help="perturb the encoded latent before inpainting")
    _add_globals(p, suppress=True)

    p = sub.add_parser("interp", help="interpolate between two encoded data points")
    p.add_argument("--pair", type=int, nargs=2, default=(0, 1), metavar=("I", "J"))
    _add_globals(p, suppress=True)

    p = sub.add_parser("sweep", help="quality versus FM steps for both priors")
    _add_globals(p, suppress=True)

    p = sub.add_parser("export-data", help="write the configured dataset")
    _add_globals(p, suppress=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = cfgmod.load(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise InvalidInput("--seed must be non-negative")
            cfg["run"]["seed"] = args.seed
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.verb](args, cfg)
    except MissingPrerequisite as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (cfgmod.ConfigError, InvalidInput, ContractError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except FileNotFoundError as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CheckpointError as exc:
        print(f"error: artifact mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except TrainingAborted as exc:
        print(f"error: training aborted at step {exc.step}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except Exception:  # noqa: BLE001
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
