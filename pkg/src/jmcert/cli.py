"""Command-line front end: certification runs, table reproduction, oracle battery.

Exit codes: 0 success, 1 oracle validation failure, 2 malformed input,
3 verdict not-broken under --fail-if-not-broken.  Output is deterministic:
JSON floats use the shortest round-trip representation, text tables use
9 significant digits, and field order is fixed.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import certifier, channels, fock, measurements
from .errors import ConvergenceError, JmcertError, ValidationError

_FMT = "{:.9g}"


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 2


def _load_json(path: str, what: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ValidationError(f"{what} file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} file {path} is not valid JSON: {exc}")


def _emit(payload: dict, out_path: str | None) -> None:
    text = json.dumps(payload, indent=2) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load_channel(path: str) -> channels.GaussianChannel:
    return channels.channel_from_dict(_load_json(path, "channel"))


def _load_measurements(path: str) -> list:
    spec = _load_json(path, "measurements")
    if isinstance(spec, dict):
        spec = [spec]
    if not isinstance(spec, list) or not spec:
        raise ValidationError("measurements file must hold a nonempty JSON list of model objects")
    return [measurements.model_from_dict(item) for item in spec]


def cmd_certify(args) -> int:
    try:
        channel = _load_channel(args.channel)
        members = _load_measurements(args.measurements)
        cert = certifier.certify(certifier.MeasurementSet(tuple(members)), channel)
    except JmcertError as exc:
        return _fail(str(exc))
    _emit(certifier.certificate_to_dict(cert), args.out)
    if args.fail_if_not_broken and not cert.broken:
        return 3
    return 0


def cmd_smin(args) -> int:
    try:
        channel = _load_channel(args.channel)
    except JmcertError as exc:
        return _fail(str(exc))
    _emit({"s_min": certifier.s_min_isotropic(channel), "modes": channel.modes}, args.out)
    return 0


def _table1_rows(class_filter: str | None):
    rows = certifier.reproduce_table1()
    if class_filter is not None:
        rows = [r for r in rows if r.class_tag == class_filter]
    return rows


def cmd_table1(args) -> int:
    if args.class_name is not None and args.class_name not in channels.CLASS_TAGS:
        return _fail(f"unknown channel class {args.class_name!r}; expected one of {channels.CLASS_TAGS}")
    rows = _table1_rows(args.class_name)
    header = ("class", "tau", "nbar", "s_min_eigen", "s_min_closed", "abs_diff")
    widths = (6, 14, 6, 16, 16, 12)
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        cells = (
            r.class_tag,
            _FMT.format(r.tau),
            _FMT.format(r.nbar),
            _FMT.format(r.s_min_eigen),
            _FMT.format(r.s_min_closed),
            _FMT.format(r.abs_diff),
        )
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    max_diff = max(r.abs_diff for r in rows)
    print(f"max |diff| = {_FMT.format(max_diff)} over {len(rows)} rows")
    if args.csv:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("class,tau,nbar,s_min_eigen,s_min_closed,abs_diff\n")
            for r in rows:
                fh.write(
                    f"{r.class_tag},{r.tau!r},{r.nbar!r},{r.s_min_eigen!r},"
                    f"{r.s_min_closed!r},{r.abs_diff!r}\n"
                )
    return 0 if max_diff <= 1e-9 else 1


def cmd_pqd_grid(args) -> int:
    try:
        model = measurements.model_from_dict(_load_json(args.model, "model"))
        if args.points < 3 or args.points % 2 == 0:
            raise ValidationError(f"--points must be an odd integer >= 3, got {args.points}")
        grid = fock.PhaseGrid(args.half_width, args.points)
        if isinstance(model, (measurements.GaussianMeasurement, measurements.Heterodyne)):
            outcome_list = [(args.outcome if args.outcome else (0.0, 0.0))]
            labels = ["{},{}".format(*outcome_list[0])]
        else:
            outcome_list = list(measurements.outcomes(model))
            labels = outcome_list
        mesh = grid.mesh_points()
        columns = [
            np.asarray(measurements.spqd(model, outcome, args.s, mesh))
            for outcome in outcome_list
        ]
    except JmcertError as exc:
        return _fail(str(exc))
    lines = ["z1,z2,outcome,value\n"]
    for i, z1 in enumerate(grid.axis):
        for j, z2 in enumerate(grid.axis):
            for label, col in zip(labels, columns):
                lines.append(f"{z1!r},{z2!r},{label},{col[i, j]!r}\n")
    text = "".join(lines)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_eb_check(args) -> int:
    try:
        nu_grid = np.geomspace(1.0, args.nu_max, args.nu_points)
        report = channels.eb_tms_scan(args.tau, args.epsilon, nu_grid)
    except JmcertError as exc:
        return _fail(str(exc))
    _emit(
        {
            "tau": args.tau,
            "epsilon": args.epsilon,
            "sufficient_condition_psd": report.sufficient_condition_psd,
            "tms_min_eigenvalue": report.tms_min_eigenvalue,
            "tms_separable": report.tms_separable,
            "scan_nu_range": list(report.scan_nu_range),
        },
        args.out,
    )
    return 0


# ---------------------------------------------------------------------------
# oracle battery

def _item_normalization(cutoff, tol=1e-6):
    grid = fock.DEFAULT_Y_GRID
    identity = np.eye(cutoff, dtype=complex)
    worst = 0.0
    for s in (-1.0, -0.5, 0.0, 0.5):
        for z in ((0.0, 0.0), (2.0, -1.0)):
            worst = max(worst, abs(fock.spqd_numeric(identity, s, z, grid) - 1.0 / (2 * np.pi)))
    trace_dev = abs(np.trace(fock.delta_s((0.3, -0.7), -0.5, cutoff)).real - 1.0 / (2 * np.pi))
    worst = max(worst, trace_dev)
    return worst, tol, "max deviation of kernel normalization from 1/(2 pi)"


def _item_closed_form(cutoff, tol=1e-6):
    grid = fock.DEFAULT_Y_GRID
    z_points = [(0.0, 0.0), (1.0, 0.5), (0.0, -2.0), (3.0, 0.0)]
    models = [
        measurements.RealisticPD(0.25),
        measurements.ThermalPD(2.0),
        measurements.IdealPD(),
    ]
    worst = 0.0
    for model in models:
        for outcome in measurements.outcomes(model):
            matrix = fock.povm_matrix(model, outcome, cutoff)
            for s in (-1.0, -0.5, 0.0, 0.5):
                for z in z_points:
                    numeric = fock.spqd_numeric(matrix, s, z, grid)
                    closed = measurements.spqd(model, outcome, s, np.array(z))
                    worst = max(worst, abs(numeric - float(closed)))
    return worst, tol, "max |numeric - closed form| over catalogue models"


def _item_heterodyne_identity(cutoff, tol=1e-8):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(20):
        alpha = 2.0 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
        z = np.sqrt(2.0) * np.array([alpha.real, alpha.imag])
        kernel = fock.delta_s(z, -1.0, cutoff)
        target = fock.coherent_projector(z, cutoff) / (2 * np.pi)
        worst = max(worst, float(np.linalg.norm(fock.central_block(kernel - target))))
    return worst, tol, "Frobenius distance of s=-1 kernel from coherent projector"


def _item_born_pairing(cutoff, tol=1e-6):
    z_grid = fock.PhaseGrid(10.0, 201)
    worst = 0.0
    for nbar in (0.0, 1.0):
        rho = fock.thermal_state(nbar, cutoff)
        for model in (measurements.IdealPD(), measurements.RealisticPD(0.25)):
            for s in (-0.5, 0.0):
                report = fock.born_pairing(rho, model, measurements.NO_CLICK, s, z_grid)
                worst = max(worst, report.abs_error)
                p_dark = model.p_dark if isinstance(model, measurements.RealisticPD) else 0.0
                anchor = (1.0 - p_dark) / (nbar + 1.0)
                worst = max(worst, abs(report.reference - anchor))
    return worst, tol, "max |Tr[rho M] - quasiprobability pairing|"


def _item_reconstruction(cutoff, tol=1e-3):
    report = fock.reconstruct(
        measurements.IdealPD(), measurements.NO_CLICK, 0.5, fock.PhaseGrid(8.0, 161), min(cutoff, 30)
    )
    return report.abs_error, tol, "Frobenius error of the POVM reconstruction"


def _item_mother_measurement(cutoff, tol=1e-6):
    worst = 0.0
    for tau, z in ((0.5, (1.0, 0.0)), (0.7, (0.0, 0.0)), (0.7, (1.0, -1.0))):
        report = fock.mother_heterodyne_check(tau, z, cutoff=min(cutoff, 30))
        worst = max(worst, report.abs_error)
    return worst, tol, "distance of transformed kernel from rescaled heterodyne"


def _item_convolution(cutoff, tol=1e-6):
    grid = fock.STANDARD_Z_GRID
    a = fock.convolution_check(-0.5, 0.0, grid, measurements.IdealPD(), measurements.NO_CLICK)
    b = fock.convolution_check(-1.0, 0.0, grid, measurements.ThermalPD(2.0), measurements.NO_CLICK)
    return max(a.abs_error, b.abs_error), tol, "max deviation of the ordering convolution"


def _item_eb_scan(cutoff, tol=1e-10):
    report = channels.eb_tms_scan(0.3, 0.3)
    deviation = max(0.0, -report.tms_min_eigenvalue)
    if not report.sufficient_condition_psd:
        deviation = 1.0
    if channels.eb_sufficient(channels.from_class(channels.ChannelClass("B2_Id"))):
        deviation = 1.0
    return deviation, tol, "two-mode-squeezed separability scan at tau = epsilon"


ORACLE_ITEMS = {
    "normalization": _item_normalization,
    "closed-form": _item_closed_form,
    "heterodyne-identity": _item_heterodyne_identity,
    "born-pairing": _item_born_pairing,
    "reconstruction": _item_reconstruction,
    "mother-measurement": _item_mother_measurement,
    "convolution": _item_convolution,
    "eb-scan": _item_eb_scan,
}


def cmd_oracle_validate(args) -> int:
    if args.item is not None and args.item not in ORACLE_ITEMS:
        return _fail(f"unknown oracle item {args.item!r}; expected one of {sorted(ORACLE_ITEMS)}")
    names = [args.item] if args.item else list(ORACLE_ITEMS)
    failures = 0
    for name in names:
        try:
            value, tol, description = ORACLE_ITEMS[name](args.cutoff)
            passed = value <= tol
            status = "PASS" if passed else "FAIL"
            print(f"[{status}] {name}: {description}: {value:.3e} (tolerance {tol:.0e})")
        except JmcertError as exc:
            passed = False
            print(f"[FAIL] {name}: raised {type(exc).__name__}: {exc}")
        failures += 0 if passed else 1
    total = len(names)
    print(f"{total - failures} of {total} oracle items passed")
    return 1 if failures else 0


def _two_floats(text: str):
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected 'z1,z2', got {text!r}")
    return (float(parts[0]), float(parts[1]))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jmcert",
        description="Certify incompatibility breaking of measurements under Gaussian channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("certify", help="evaluate a channel against a measurement set")
    p.add_argument("--channel", required=True, help="channel JSON file")
    p.add_argument("--measurements", required=True, help="measurement-list JSON file")
    p.add_argument("--fail-if-not-broken", action="store_true")
    p.add_argument("--out", default=None, help="write the certificate JSON here")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("smin", help="least certified isotropic ordering of a channel")
    p.add_argument("--channel", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_smin)

    p = sub.add_parser("table1", help="reproduce the single-mode channel-class thresholds")
    p.add_argument("--class", dest="class_name", default=None, metavar="NAME")
    p.add_argument("--csv", default=None, help="also write rows as CSV")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("pqd-grid", help="sample closed-form distributions on a grid")
    p.add_argument("--model", required=True, help="measurement-model JSON file")
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--half-width", type=float, default=5.0)
    p.add_argument("--points", type=int, default=51)
    p.add_argument("--outcome", type=_two_floats, default=None,
                   help="outcome point z1,z2 for gaussian-family models")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pqd_grid)

    p = sub.add_parser("oracle-validate", help="run the numerical oracle battery")
    p.add_argument("--cutoff", type=int, default=fock.DEFAULT_CUTOFF)
    p.add_argument("--item", default=None, help="run a single named item")
    p.set_defaults(func=cmd_oracle_validate)

    p = sub.add_parser("eb-check", help="entanglement-breaking scan of a noisy attenuator")
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--nu-max", type=float, default=10.0)
    p.add_argument("--nu-points", type=int, default=50)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_eb_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        return _fail(str(exc))
    except ConvergenceError as exc:
        return _fail(f"numerical guard tripped: {exc}")


if __name__ == "__main__":
    sys.exit(main())
