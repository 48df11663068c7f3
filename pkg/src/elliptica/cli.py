"""Command-line entry point.

Subcommands::

    elliptica solve     synthetic PDE solve and Poisson supersolution
    elliptica pipeline  restoration + noise + NL-means + median on an image
    elliptica bound     step-size bound for a grid

Exit status is 0 on success, 1 on runtime failure and 2 on usage errors.
Values come from the preset, then a ``--config`` file of ``key=value`` lines
(keys are flag names without dashes), then explicit flags.
"""

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .errors import DivergenceError, EllipticaError, InvalidParameterError
from .experiments import PART_A, PART_B, PRESETS, bump_source
from .metrics import evaluate
from .nonlocal_op import make_gaussian_kernel
from .pipeline import NLMeansParams, denoise_stage, restore_rgb
from .solver import (
    SolverConfig,
    StabilityWarning,
    direct_solve_oracle,
    solve_pde,
    solve_poisson,
    stable_step_bound,
)

VERIFY_RTOL = 1e-6
# iteration cap when flags are used without a preset
FLAG_MODE_MAX_ITER = 20000

SOLVER_KEYS = ("lambda", "tau", "sigma", "max_iter", "tol")


class UsageError(Exception):
    pass


def read_config_file(path):
    """Parse ``key=value`` lines; ``#`` starts a comment, ``noise`` may repeat."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key == "noise":
            values.setdefault("noise", []).extend(float(v) for v in value.split(",") if v.strip())
        else:
            values[key] = value
    return values


def _coerce(key, value):
    casts = {
        "n": int, "max_iter": int, "seed": int, "median_k": int,
        "template_radius": int, "search_radius": int,
        "lambda": float, "tau": float, "sigma": float, "tol": float, "nlm_h": float, "lg": float,
    }
    if key in ("verify", "trace"):
        return value if isinstance(value, bool) else str(value).lower() in ("1", "true", "yes", "on")
    if key in casts and isinstance(value, str):
        try:
            return casts[key](value)
        except ValueError as exc:
            raise UsageError(f"invalid value for {key}: {value!r}") from exc
    return value


def resolve(args, base):
    """Merge preset defaults, config file and explicit flags (in that order)."""
    values = dict(base)
    if getattr(args, "config", None):
        for k, v in read_config_file(args.config).items():
            values[k] = _coerce(k, v)
    for k, v in vars(args).items():
        if k in ("command", "config", "func") or v is None:
            continue
        values[k] = v
    return values


def _preset_values(preset, flag_mode_max_iter=None):
    c = preset.config
    values = {
        "lambda": c.lam, "tau": c.tau, "sigma": c.sigma, "tol": c.tol,
        "max_iter": flag_mode_max_iter or c.max_iter,
        "noise": list(preset.noise_levels), "seed": preset.seed, "median_k": preset.median_k,
        "template_radius": preset.nlm.template_radius, "search_radius": preset.nlm.search_radius,
        "nlm_h": preset.nlm.h, "nlm_color": preset.nlm.color_space,
    }
    if preset.grid_size is not None:
        values["n"] = preset.grid_size
    return values


def _base_for(args, default_preset):
    name = getattr(args, "preset", None)
    if name is None and getattr(args, "config", None):
        name = read_config_file(args.config).get("preset")
    if name is None:
        return _preset_values(default_preset, FLAG_MODE_MAX_ITER)
    if name not in PRESETS:
        raise UsageError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    return _preset_values(PRESETS[name])


def _config(values):
    try:
        return SolverConfig(
            lam=values["lambda"], tau=values["tau"], max_iter=values["max_iter"],
            tol=values["tol"], sigma=values["sigma"],
        )
    except (InvalidParameterError, TypeError) as exc:
        raise UsageError(str(exc)) from exc


def _out_dir(values):
    out = Path(values["out_dir"]) if values.get("out_dir") else io.default_out_dir()
    out.mkdir(parents=True, exist_ok=True)
    return out


def _summary_line(label, report):
    state = "converged" if report.converged else "not converged"
    return (
        f"{label}: {state} after {report.iterations} iterations, "
        f"residual {report.final_residual:.6e}"
    )


def cmd_solve(args):
    values = resolve(args, _base_for(args, PART_A))
    n = values.get("n", PART_A.grid_size)
    if n < 3:
        raise UsageError(f"--n must be >= 3, got {n}")
    config = _config(values)
    out = _out_dir(values)
    f = bump_source(n)
    u, rep_u = solve_pde(f, config)
    w, rep_w = solve_poisson(f, config)
    io.write_field_csv(u, out / "u.csv")
    io.write_field_csv(w, out / "w.csv")
    io.write_residuals_csv(rep_u.residual_history, out / "residuals_u.csv")
    io.write_residuals_csv(rep_w.residual_history, out / "residuals_w.csv")
    print(f"grid {n}x{n}, lambda={config.lam:g}, tau={config.tau:g}, sigma={config.sigma:g}, "
          f"tol={config.tol:g}, max_iter={config.max_iter}")
    print(_summary_line("u", rep_u))
    print(_summary_line("w", rep_w))
    inner = (slice(1, -1), slice(1, -1))
    print(f"interior min(u) = {u[inner].min():.6e}, interior max(u - w) = {(u - w)[inner].max():.6e}")
    print(f"wrote {out / 'u.csv'}, {out / 'w.csv'}, residual traces in {out}")
    status = 0
    if values.get("verify"):
        kernel = make_gaussian_kernel(config.sigma)
        for label, field, lam in (("u", u, config.lam), ("w", w, 0.0)):
            ref = direct_solve_oracle(f, lam, kernel)
            denom = np.linalg.norm(ref)
            err = np.linalg.norm(field - ref) / denom if denom else np.linalg.norm(field)
            ok = err <= VERIFY_RTOL
            rep = rep_u if label == "u" else rep_w
            note = "" if rep.converged else "; iteration stopped before tol"
            print(f"verify {label}: {'PASS' if ok else 'FAIL'} (relative l2 error {err:.3e}, limit {VERIFY_RTOL:g}{note})")
            status = status or (0 if ok else 1)
    return status


def _format_table(rows):
    lines = [
        f"{'NoiseLevel':>10} | {'Metric':<15} | {'PSNR(dB)':>9} | {'SSIM':>6} | {'MSE':>9}",
        "-" * 62,
    ]
    for sn, restored, denoised in rows:
        lines.append(f"{sn:>10.2f} | {'Restored PDE':<15} | {restored.psnr_db:>9.2f} | {restored.ssim:>6.4f} | {restored.mse:>9.6f}")
        lines.append(f"{'':>10} | {'Denoised Output':<15} | {denoised.psnr_db:>9.2f} | {denoised.ssim:>6.4f} | {denoised.mse:>9.6f}")
        lines.append("-" * 62)
    return "\n".join(lines)


def cmd_pipeline(args):
    values = resolve(args, _base_for(args, PART_B))
    if not values.get("image"):
        raise UsageError("--image is required")
    config = _config(values)
    try:
        nlm = NLMeansParams(
            values["template_radius"], values["search_radius"], values["nlm_h"], values["nlm_color"]
        )
    except InvalidParameterError as exc:
        raise UsageError(str(exc)) from exc
    median_k = values["median_k"]
    if median_k < 3 or median_k % 2 == 0:
        raise UsageError(f"--median-k must be odd and >= 3, got {median_k}")
    noise_levels = values["noise"] if values["noise"] else [0.0]
    if any(s < 0 for s in noise_levels):
        raise UsageError("noise levels must be >= 0")
    ext = "." + values.get("format", "png")
    out = _out_dir(values)

    clean = io.load_image(values["image"])
    restored, reports = restore_rgb(clean, config, return_reports=True)
    if values.get("trace"):
        for c, rep in enumerate(reports):
            io.write_residuals_csv(rep.residual_history, out / f"residuals_restore_c{c}.csv")
    restored_metrics = evaluate(clean, restored)
    rows = []
    for idx, sn in enumerate(noise_levels):
        seed = values["seed"] + idx
        print(f"\n--- Noise s={sn:.2f} ---")
        noisy, denoised = denoise_stage(restored, sn, seed, nlm, median_k)
        tag = f"noise_{sn:.2f}"
        for stage, img in (("restored", restored), ("noisy", noisy), ("denoised", denoised)):
            io.save_image(img, out / f"{tag}_{stage}{ext}")
        denoised_metrics = evaluate(clean, denoised)
        record = {
            "noise_sigma": sn,
            "seed": seed,
            "restored": restored_metrics.to_dict(),
            "noisy": evaluate(clean, noisy).to_dict(),
            "denoised": denoised_metrics.to_dict(),
        }
        (out / f"{tag}_metrics.json").write_text(json.dumps(record, indent=2) + "\n")
        print(f"MSE  = {denoised_metrics.mse:.6f}")
        print(f"PSNR = {denoised_metrics.psnr_db:.2f} dB")
        print(f"SSIM = {denoised_metrics.ssim:.4f}")
        rows.append((sn, restored_metrics, denoised_metrics))

    table = _format_table(rows)
    print("\n=== Summary Table ===")
    print(table)
    (out / "summary.txt").write_text(table + "\n")
    with open(out / "summary.csv", "w", newline="") as fh:
        fh.write("noise_sigma,stage,psnr_db,ssim,mse\n")
        for sn, r, d in rows:
            for stage, m in (("restored_pde", r), ("denoised", d)):
                fh.write(f"{sn!r},{stage},{m.to_dict()['psnr_db']!r},{m.ssim!r},{m.mse!r}\n")
    return 0


def cmd_bound(args):
    values = resolve(args, {"n": 50, "lambda": 0.0, "lg": 1.0})
    n = values["n"]
    if n < 3:
        raise UsageError(f"--n must be >= 3, got {n}")
    lam, lg = values["lambda"], values["lg"]
    if lam < 0 or lg < 0:
        raise UsageError("--lambda and --lg must be >= 0")
    b = stable_step_bound(n, n, lam, lg)
    print(f"grid: {n}x{n} ({n - 2}x{n - 2} interior)")
    print(f"1/C_P^2 (lambda_min): {b.lambda_min:.6e}")
    print(f"||Delta|| (lambda_max): {b.lambda_max:.6e}")
    print(f"L_G: {lg:g}")
    print(f"lambda * L_G: {lam * lg:.6e}")
    if b.feasible:
        print(f"tau bound: {b.tau_max:.6e}")
    else:
        print(
            "tau bound: INFEASIBLE\n"
            f"  lambda * L_G = {lam * lg:.6e} >= 1/C_P^2 = {b.lambda_min:.6e}: the step-size "
            "window for guaranteed contraction is empty.\n"
            "  The condition is sufficient, not necessary; the relaxation may still converge."
        )
    tau = values.get("tau")
    if tau is not None:
        if not b.feasible or tau >= b.tau_max:
            print(f"warning: tau = {tau:g} is outside the guaranteed-contraction range")
        else:
            print(f"tau = {tau:g} is inside the bound; amplification q(tau) = {b.amplification(tau):.6e}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="elliptica", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--config", help="key=value file mirroring the flags")
        p.add_argument("--lambda", dest="lambda", type=float)
        p.add_argument("--tau", type=float)
        p.add_argument("--sigma", type=float)
        p.add_argument("--max-iter", dest="max_iter", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--out-dir", dest="out_dir", help="output directory (default $ELLIPTICA_OUT or ./out)")

    p = sub.add_parser("solve", help="solve the PDE and the Poisson problem on a synthetic source")
    solver_flags(p)
    p.add_argument("--n", type=int, help="grid points per side")
    p.add_argument("--verify", action="store_true", default=None, help="compare against the dense direct solve")
    p.add_argument("--trace", action="store_true", default=None, help="residual traces are always written; accepted for symmetry")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("pipeline", help="restore, add noise, NL-means and median filter an image")
    solver_flags(p)
    p.add_argument("--image", help="PNG, PPM or PGM input")
    p.add_argument("--noise", type=float, action="append", help="noise standard deviation (repeatable)")
    p.add_argument("--seed", type=int)
    p.add_argument("--median-k", dest="median_k", type=int)
    p.add_argument("--nlm-h", dest="nlm_h", type=float)
    p.add_argument("--nlm-color", dest="nlm_color", choices=("rgb", "lab"), help="NL-means color handling")
    p.add_argument("--template-radius", dest="template_radius", type=int)
    p.add_argument("--search-radius", dest="search_radius", type=int)
    p.add_argument("--format", choices=("png", "ppm"), help="stage image format (default png)")
    p.add_argument("--trace", action="store_true", default=None, help="write per-channel restoration residuals")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("bound", help="print the step-size bound for an n x n grid")
    p.add_argument("--config")
    p.add_argument("--n", type=int)
    p.add_argument("--lambda", dest="lambda", type=float)
    p.add_argument("--lg", type=float, help="Lipschitz constant of G (default 1)")
    p.add_argument("--tau", type=float, help="step to check against the bound")
    p.set_defaults(func=cmd_bound)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    with warnings.catch_warnings():
        warnings.simplefilter("always", StabilityWarning)
        warnings.showwarning = lambda msg, *a, **k: print(f"warning: {msg}", file=sys.stderr)
        try:
            return args.func(args)
        except UsageError as exc:
            parser.error(str(exc))
        except FileNotFoundError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1
        except DivergenceError as exc:
            print(f"error: solver diverged at iteration {exc.iteration}", file=sys.stderr)
            return 1
        except (EllipticaError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 1


if __name__ == "__main__":
    sys.exit(main())
