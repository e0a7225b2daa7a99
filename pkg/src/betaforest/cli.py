"""Command-line interface.

Subcommands: train, predict, evaluate, simulate, glm-fit. Every run
with a --seed is reproducible; no command mutates its input files.
"""

import argparse
import csv
import json
import sys

import numpy as np

from . import forest, glm, model_io, simulate
from .data_io import CsvFormatError, load_csv, load_features
from .dataset import Dataset
from .scoring import predictive_loglik
from .special import Transform
from .tree import GrowthConfig

_TRANSFORMS = {
    "none": Transform.IDENTITY,
    "logit": Transform.LOGIT,
    "asin": Transform.ARCSINE_SQRT,
}

_SHAPES = {"symmetric": "symmetric", "skewed": "left_skewed"}


def _fmt(x):
    return repr(float(x))


def build_parser():
    parser = argparse.ArgumentParser(prog="betaforest")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a forest model")
    p_train.add_argument("--data", required=True)
    p_train.add_argument("--outcome", required=True)
    p_train.add_argument("--criterion", choices=["beta", "mse"], default="beta")
    p_train.add_argument("--transform", choices=sorted(_TRANSFORMS), default="none")
    p_train.add_argument("--ntree", type=int, default=500)
    p_train.add_argument("--mtry", default="auto", help="integer or 'auto' (ceil(sqrt(p)))")
    p_train.add_argument("--min-node-size", type=int, default=5)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--threads", type=int, default=1)
    p_train.add_argument("--out", required=True)

    p_pred = sub.add_parser("predict", help="predict with a saved model")
    p_pred.add_argument("--model", required=True)
    p_pred.add_argument("--data", required=True)
    p_pred.add_argument("--out", required=True)

    p_eval = sub.add_parser("evaluate", help="predictive log-likelihood on a dataset")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--data", required=True)
    p_eval.add_argument("--outcome", default="y")

    p_sim = sub.add_parser("simulate", help="run simulation scenarios")
    p_sim.add_argument("--shape", default="symmetric",
                       help="comma list of symmetric|skewed")
    p_sim.add_argument("--phi", default="2", help="comma list of precision values")
    p_sim.add_argument("--p", default="4", help="comma list of feature counts")
    p_sim.add_argument("--reps", type=int, default=20)
    p_sim.add_argument("--methods", default=",".join(simulate.METHODS))
    p_sim.add_argument("--ntree", type=int, default=500)
    p_sim.add_argument("--min-node-size", type=int, default=10)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--threads", type=int, default=1)
    p_sim.add_argument("--no-jacobian", action="store_true",
                       help="score transformed forests without the change-of-variables term")
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--summary-out", default=None,
                       help="defaults to OUT with a .summary.csv suffix")

    p_glm = sub.add_parser("glm-fit", help="fit a parametric beta regression")
    p_glm.add_argument("--data", required=True)
    p_glm.add_argument("--outcome", required=True)
    p_glm.add_argument("--design", required=True,
                       help="JSON file: {intercept, main_effects, interactions}")
    p_glm.add_argument("--out", required=True)

    return parser


def _cmd_train(args):
    if args.criterion == "beta" and args.transform != "none":
        raise SystemExit("--criterion beta requires --transform none: "
                         "the beta criterion is defined on the original outcome scale")
    data = load_csv(args.data, args.outcome)
    if args.mtry == "auto":
        mtry = forest.default_mtry(data.p)
    else:
        mtry = int(args.mtry)
    criterion = "beta_loglik" if args.criterion == "beta" else "mse"
    config = GrowthConfig(criterion=criterion, mtry=mtry, min_node_size=args.min_node_size)
    model = forest.train(
        data, config, ntree=args.ntree, transform_kind=_TRANSFORMS[args.transform],
        master_seed=args.seed, n_jobs=args.threads,
    )
    model_io.save_model(args.out, model)
    print(f"trained {args.ntree} trees (criterion={criterion}, mtry={mtry}) -> {args.out}")
    return 0


def _cmd_predict(args):
    model = model_io.load_model(args.model)
    if isinstance(model, glm.BetaGlmFit):
        X, _ = load_features(args.data, model.schema)
        means = glm.predict_mean_glm(model, Dataset(X, np.full(X.shape[0], 0.5), model.schema),
                                     allow_unconverged=True)
        working = means
    else:
        X, _ = load_features(args.data, model.schema)
        preds = forest.predict(model, X)
        means = preds.response
        working = preds.working
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "predicted_mean", "working_scale_prediction"])
        for i, (m, wk) in enumerate(zip(means, working)):
            w.writerow([i, _fmt(m), _fmt(wk)])
    print(f"wrote {len(means)} predictions -> {args.out}")
    return 0


def _cmd_evaluate(args):
    model = model_io.load_model(args.model)
    X, y = load_features(args.data, model.schema, outcome=args.outcome)
    if isinstance(model, glm.BetaGlmFit):
        data = Dataset(X, y, model.schema)
        means = glm.predict_mean_glm(model, data, allow_unconverged=True)
        ll = predictive_loglik(y, means, model.phi, "beta")
        family = "beta"
    else:
        means = forest.predict(model, X).working
        ll = predictive_loglik(y, means, model.scale, model.family)
        family = model.family
    print(f"predictive log-likelihood ({family}): {_fmt(ll)}")
    return 0


def _parse_list(raw, cast, valid=None, what=""):
    items = [s.strip() for s in str(raw).split(",") if s.strip()]
    if not items:
        raise SystemExit(f"empty {what} list")
    out = []
    for s in items:
        if valid is not None and s not in valid:
            raise SystemExit(f"unknown {what} {s!r}")
        out.append(cast(s))
    return out


def _cmd_simulate(args):
    shapes = _parse_list(args.shape, lambda s: _SHAPES[s], valid=_SHAPES, what="shape")
    phis = _parse_list(args.phi, float, what="phi")
    ps = _parse_list(args.p, int, what="p")
    methods = tuple(_parse_list(args.methods, str, valid=set(simulate.METHODS), what="method"))
    specs = [
        simulate.ScenarioSpec(shape=shape, phi=phi, p=p, n_reps=args.reps, seed=args.seed)
        for shape in shapes
        for phi in phis
        for p in ps
    ]
    rows = simulate.run_study(
        specs, methods, ntree=args.ntree, min_node_size=args.min_node_size,
        include_jacobian=not args.no_jacobian, n_jobs=args.threads,
    )
    simulate.write_results_csv(rows, args.out)
    summary_path = args.summary_out or (args.out + ".summary.csv")
    simulate.write_summary_csv(simulate.summarize(rows), summary_path)
    print(f"wrote {len(rows)} records -> {args.out} (summary -> {summary_path})")
    return 0


def _cmd_glm_fit(args):
    with open(args.design, encoding="utf-8") as fh:
        spec = json.load(fh)
    design = glm.DesignSpec(
        intercept=bool(spec.get("intercept", True)),
        main_effects=tuple(spec.get("main_effects", ())),
        interactions=tuple(tuple(p) for p in spec.get("interactions", ())),
    )
    data = load_csv(args.data, args.outcome)
    fit = glm.fit(data, design)
    model_io.save_model(args.out, fit)
    status = "converged" if fit.converged else "NOT converged"
    print(f"glm fit {status} in {fit.iterations} iterations, "
          f"log-likelihood {_fmt(fit.loglik)}, phi {_fmt(fit.phi)} -> {args.out}")
    return 0 if fit.converged else 1


_COMMANDS = {
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "simulate": _cmd_simulate,
    "glm-fit": _cmd_glm_fit,
}


def cli_dispatch(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (CsvFormatError, model_io.ModelFileError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main():
    raise SystemExit(cli_dispatch())


if __name__ == "__main__":
    main()
