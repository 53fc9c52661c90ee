"""Batch command-line interface.

Every operation is exposed as a subcommand with JSON input arguments and
JSON (default) or aligned-table output.  All numbers are serialized as
decimal strings at the working precision, so results survive round-trips
beyond double precision.  Exit codes: 0 success, 2 validation error,
3 numerical failure; diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from mpmath import mp

from . import circlebundle, flatmodel, modtors, polylog, rtorsion
from .errors import NumericalError, ValidationError
from .numfield import dirichlet_rank, norm, parse_descriptor, parse_rational

DEFAULT_DIGITS = 50


def _resolve_digits(args, descriptor=None) -> int:
    digits = args.digits
    if digits is None and descriptor is not None:
        digits = descriptor.get("digits")
    if digits is None:
        digits = DEFAULT_DIGITS
    digits = int(digits)
    if not 30 <= digits <= 1000:
        raise ValidationError("digits must lie in [30, 1000]")
    return digits


def _load_field(args):
    if not getattr(args, "field", None):
        raise ValidationError("this command needs --field with a descriptor file")
    try:
        with open(args.field) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read field descriptor: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValidationError(f"field descriptor is not valid JSON: {exc}") from exc
    digits = _resolve_digits(args, data)
    field, units = parse_descriptor(data, digits_override=digits)
    return field, units, digits


def _json_arg(text, what):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} is not valid JSON: {exc}") from exc


def _s(x, digits):
    return mp.nstr(mp.mpf(x) if not isinstance(x, (mp.mpf, mp.mpc)) else x, digits)


def _form_reduced(f, digits):
    return {
        f"b1(sigma_{k + 1})": _s(v, digits)
        for k, v in enumerate(f.reduced_b1_coords())
    }


def _point_dict(x, digits):
    d = x.to_dict(digits)
    d["torus_b1_reduced"] = _form_reduced(x.torus.as_form(), digits)
    return d


def _parse_point(lattice, data):
    if not isinstance(data, dict) or "rank" not in data or "torus" not in data:
        raise ValidationError('a point class needs {"rank", "cls", "torus"}')
    torus = data["torus"]
    vals = [torus.get(f"sigma_{k}", "0") for k in range(lattice.field.n_places)]
    f = flatmodel.make_form(lattice.field, 0, vals)
    return flatmodel.point_class(lattice, int(data["rank"]), data.get("cls", ()), f)


def _ring_cell(field, cell):
    if isinstance(cell, str):
        return field.element([parse_rational(cell)])
    if isinstance(cell, (list, tuple)):
        return field.element([parse_rational(c) for c in cell])
    raise ValidationError('matrix entries must be "p/q" strings or coefficient lists')


def _parse_presentation(field, data):
    entries = data.get("entries") if isinstance(data, dict) else data
    if not isinstance(entries, list) or not all(isinstance(r, list) for r in entries):
        raise ValidationError("presentation entries must be a list of rows")
    rows = [[_ring_cell(field, cell) for cell in row] for row in entries]
    if any(len(r) != len(rows) for r in rows):
        # Shorthand: a single row of strings is one entry's coefficient vector.
        if len(entries) == 1 and all(isinstance(c, str) for c in entries[0]):
            rows = [[field.element([parse_rational(c) for c in entries[0]])]]
    if isinstance(data, dict) and "size" in data and int(data["size"]) != len(rows):
        raise ValidationError("declared presentation size disagrees with the entries")
    return modtors.presentation(field, rows)


def _parse_complex(field, data):
    for key in ("lengths", "diffs", "grams"):
        if key not in data:
            raise ValidationError(f'complex JSON needs "{key}"')
    diffs = [
        [[_ring_cell(field, cell) for cell in row] for row in m] for m in data["diffs"]
    ]
    specs = []
    for raw in data.get("cohomology", [{} for _ in data["lengths"]]):
        torsion = None
        if raw.get("torsion") is not None:
            torsion = _parse_presentation(field, raw["torsion"])
        reps = [
            [_ring_cell(field, cell) for cell in row] for row in raw.get("free_reps", [])
        ]
        specs.append(
            rtorsion.CohomologySpec(
                free_rank=int(raw.get("free_rank", 0)),
                free_reps=tuple(tuple(r) for r in reps),
                free_grams=tuple(raw.get("free_grams", ())),
                torsion=torsion,
            )
        )
    return rtorsion.build_complex_over_r(
        field, data["lengths"], diffs, data["grams"], specs
    )


def _theta_from_args(args, digits):
    if args.theta_over_2pi is not None:
        q = parse_rational(args.theta_over_2pi)
        with mp.workdps(digits + polylog.GUARD):
            return 2 * mp.pi * q.numerator / q.denominator
    if args.theta is not None:
        with mp.workdps(digits + polylog.GUARD):
            return mp.mpf(args.theta)
    raise ValidationError("give the angle as --theta or --theta-over-2pi")


def cmd_field_info(args):
    field, units, digits = _load_field(args)
    places = []
    for k, z in enumerate(field.sigma_star):
        places.append(
            {
                "index": k,
                "type": "real" if field.is_real_place(k) else "complex",
                "re": _s(mp.re(z), digits),
                "im": _s(mp.im(z), digits),
            }
        )
    return {
        "poly": list(field.poly),
        "degree": field.degree,
        "digits": digits,
        "r_real": field.r_real,
        "r_complex": field.r_complex,
        "dirichlet_rank": dirichlet_rank(field),
        "class_orders": list(field.class_orders),
        "units_in_descriptor": len(units),
        "places": places,
    }


def cmd_unit_log(args):
    field, _, digits = _load_field(args)
    vec = _json_arg(args.unit, "--unit")
    elem = field.element([parse_rational(c) for c in vec])
    f = flatmodel.unit_log(field, elem)
    return {
        "unit": [str(c) for c in elem.coeffs],
        "norm": str(norm(field, elem)),
        "canonical": f.to_dict(digits)["coeffs"],
        "b1_reduced": _form_reduced(f, digits),
    }


def cmd_lattice(args):
    field, units, digits = _load_field(args)
    lat = flatmodel.build_lattice(field, units)
    return {
        "rank": lat.rank,
        "tol": _s(lat.tol, 8),
        "basis_b1_reduced": [
            _form_reduced(lat.basis_form(i), digits) for i in range(lat.rank)
        ],
    }


def cmd_reduce(args):
    field, units, digits = _load_field(args)
    lat = flatmodel.build_lattice(field, units)
    vals = _json_arg(args.form, "--form")
    f = flatmodel.make_form(field, 0, vals)
    t, is_zero = flatmodel.reduce_mod_lattice(lat, f)
    return {
        "is_zero": is_zero,
        "torus": t.to_dict(digits),
        "b1_reduced": _form_reduced(t.as_form(), digits),
    }


def cmd_cycl(args):
    field, units, digits = _load_field(args)
    lat = flatmodel.build_lattice(field, units)
    grams = _json_arg(args.grams, "--grams")
    x = flatmodel.cycl_free(field, lat, grams)
    return _point_dict(x, digits)


def cmd_scale(args):
    field, units, digits = _load_field(args)
    lat = flatmodel.build_lattice(field, units)
    x = _parse_point(lat, _json_arg(args.point, "--point"))
    lambdas = _json_arg(args.lambdas, "--lambdas")
    y = flatmodel.scale_class(lat, x, lambdas)
    return _point_dict(y, digits)


def cmd_zhat(args):
    field, units, digits = _load_field(args)
    lat = flatmodel.build_lattice(field, units)
    pres = _parse_presentation(field, _json_arg(args.pres, "--pres"))
    x = modtors.zhat(field, lat, pres)
    out = _point_dict(x, digits)
    out["det"] = [str(c) for c in pres.det_elem.coeffs]
    out["in_lattice"] = x.torus.is_zero()
    return out


def cmd_rtorsion(args):
    field, _, digits = _load_field(args)
    cplx = _parse_complex(field, _json_arg(args.complex, "--complex"))
    with mp.workdps(digits + polylog.GUARD):
        taus = {}
        for k in range(field.n_places):
            taus[f"sigma_{k}"] = _s(
                rtorsion.reidemeister(rtorsion.at_place(cplx, k)), digits
            )
    f = rtorsion.rtorsion_form(field, cplx)
    return {
        "tau": taus,
        "form_canonical": f.to_dict(digits)["coeffs"],
        "form_b1_reduced": _form_reduced(f, digits),
    }


def cmd_euler_check(args):
    field, units, digits = _load_field(args)
    lat = flatmodel.build_lattice(field, units)
    cplx = _parse_complex(field, _json_arg(args.complex, "--complex"))
    res = rtorsion.verify_euler_identity(field, lat, cplx)
    out = {"residual": _point_dict(res, digits), "is_zero": res.is_zero()}
    return out


def cmd_polylog(args):
    digits = _resolve_digits(args)
    theta = _theta_from_args(args, digits)
    val = polylog.polylog_circle(args.n, theta, digits)
    return {
        "n": args.n,
        "theta": _s(theta, digits),
        "re": _s(mp.re(val), digits),
        "im": _s(mp.im(val), digits),
    }


def cmd_zeta(args):
    digits = _resolve_digits(args)
    return {"s": args.s, "value": _s(polylog.zeta_int(args.s, digits), digits)}


def cmd_bernoulli(args):
    _ = _resolve_digits(args)
    return {"m": args.m, "value": str(polylog.bernoulli(args.m))}


def cmd_beta_check(args):
    digits = _resolve_digits(args)
    quad, exact = polylog.beta_integral_check(args.j, digits)
    with mp.workdps(digits + polylog.GUARD):
        err = abs(quad - mp.mpf(exact.numerator) / exact.denominator)
    return {
        "j": args.j,
        "quadrature": _s(quad, digits),
        "exact": str(exact),
        "abs_err": _s(err, 8),
    }


def cmd_circle_torsion(args):
    digits = _resolve_digits(args)
    setup = circlebundle.make_cyclotomic_setup(args.r, digits)
    coeffs = circlebundle.torsion_form_coeffs(setup, args.jmax)
    rows = [
        {
            "sigma": k,
            "theta": _s(setup.thetas[k], digits),
            "j": j,
            "T": _s(coeffs[(k, j)], digits),
        }
        for k in range(setup.field.n_places)
        for j in range(args.jmax + 1)
    ]
    return {"r": args.r, "rows": rows}


def cmd_u_coeff(args):
    digits = _resolve_digits(args)
    setup = circlebundle.make_cyclotomic_setup(args.r, digits)
    vals = circlebundle.u_coeff(setup, args.j)
    rows = [{"sigma": k, "u": _s(vals[k], digits)} for k in sorted(vals)]
    return {"r": args.r, "j": args.j, "rows": rows}


def cmd_regulator_check(args):
    digits = _resolve_digits(args)
    setup = circlebundle.make_cyclotomic_setup(args.r, digits)
    chk = circlebundle.regulator_identity_check(setup, args.j)
    rows = [
        {
            "sigma": k,
            "lhs": _s(chk[k][0], digits),
            "rhs": _s(chk[k][1], digits),
            "ratio": _s(chk[k][2], 8),
        }
        for k in sorted(chk)
    ]
    return {"r": args.r, "j": args.j, "rows": rows}


def cmd_cheeger_muller(args):
    digits = _resolve_digits(args)
    setup = circlebundle.make_cyclotomic_setup(args.r, digits)
    chk = circlebundle.cheeger_muller_check(setup)
    rows = [
        {
            "sigma": k,
            "T0_abs": _s(chk[k][0], digits),
            "ln_tau": _s(chk[k][1], digits),
            "residual": _s(chk[k][2], 8),
        }
        for k in sorted(chk)
    ]
    return {"r": args.r, "rows": rows}


def cmd_borel_dims(args):
    field, _, _ = _load_field(args)
    dims = circlebundle.borel_dims(field, args.imax)
    xdims = {
        str(2 * j - 1): circlebundle.x_space_dim(field, j)
        for j in range(2, args.imax // 2 + 2)
        if 2 * j - 1 <= args.imax
    }
    return {
        "imax": args.imax,
        "dims": {str(i): dims[i] for i in sorted(dims)},
        "x_space_dims": xdims,
    }


def cmd_normalize(args):
    digits = _resolve_digits(args)
    chern, igusa, (bmag, bpow) = circlebundle.normalization_factors(args.j, digits)
    out = circlebundle.convert(mp.mpf(args.value), args.frm, args.to, args.j, digits)
    res = {
        "j": args.j,
        "from": args.frm,
        "to": args.to,
        "N_chern": _s(chern, digits),
        "N_igusa": _s(igusa, digits),
        "N_borel": {"magnitude": _s(bmag, digits), "i_power": bpow},
    }
    if isinstance(out, mp.mpc):
        res["value"] = {"re": _s(mp.re(out), digits), "im": _s(mp.im(out), digits)}
    else:
        res["value"] = _s(out, digits)
    return res


def cmd_hatcher(args):
    digits = _resolve_digits(args)
    a_k, kappa, value = circlebundle.hatcher_constant(args.k, digits)
    return {
        "k": args.k,
        "a": a_k,
        "kappa": f"{kappa.numerator}/{kappa.denominator}",
        "value": _s(value, digits),
    }


def _render_table(obj, indent=0):
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        if "rows" in obj and isinstance(obj["rows"], list) and obj["rows"]:
            for key, val in obj.items():
                if key != "rows":
                    lines.append(f"{pad}{key} = {val}")
            rows = obj["rows"]
            cols = list(rows[0].keys())
            widths = {
                c: max(len(str(c)), max(len(str(r[c])) for r in rows)) for c in cols
            }
            lines.append(pad + "  ".join(str(c).ljust(widths[c]) for c in cols))
            for r in rows:
                lines.append(pad + "  ".join(str(r[c]).ljust(widths[c]) for c in cols))
        else:
            for key, val in obj.items():
                if isinstance(val, (dict, list)):
                    lines.append(f"{pad}{key}:")
                    lines.append(_render_table(val, indent + 1))
                else:
                    lines.append(f"{pad}{key} = {val}")
    elif isinstance(obj, list):
        for k, val in enumerate(obj):
            if isinstance(val, (dict, list)):
                lines.append(f"{pad}[{k}]")
                lines.append(_render_table(val, indent + 1))
            else:
                lines.append(f"{pad}[{k}] {val}")
    else:
        lines.append(f"{pad}{obj}")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="regtor",
        description="Arithmetic regulator, torsion, and polylogarithm calculator.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def add(name, handler, help_text, *, field=False, **flags):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--digits", type=int, default=None, help="working precision (30..1000)")
        p.add_argument("--format", choices=("json", "table"), default="json")
        if field:
            p.add_argument("--field", required=False, help="field descriptor JSON path")
        for flag, spec in flags.items():
            p.add_argument(flag, **spec)
        p.set_defaults(handler=handler)
        return p

    add("field-info", cmd_field_info, "embeddings, signature, unit rank", field=True)
    add(
        "unit-log", cmd_unit_log, "half-log-absolute-value vector of a unit",
        field=True,
        **{"--unit": {"required": True, "help": 'coefficient vector, e.g. ["1","1"]'}},
    )
    add("lattice", cmd_lattice, "reduced regulator lattice from descriptor units", field=True)
    add(
        "reduce", cmd_reduce, "reduce a degree-1 vector modulo the lattice",
        field=True,
        **{"--form": {"required": True, "help": "per-place values as JSON list"}},
    )
    add(
        "cycl", cmd_cycl, "class of a metrized free module",
        field=True,
        **{"--grams": {"required": True, "help": "JSON list of Gram matrices, one per place"}},
    )
    add(
        "scale", cmd_scale, "rescale the metric of a point class",
        field=True,
        **{
            "--point": {"required": True, "help": "point class JSON"},
            "--lambdas": {"required": True, "help": "JSON list of positive scalars per place"},
        },
    )
    add(
        "zhat", cmd_zhat, "secondary class of a torsion-module presentation",
        field=True,
        **{"--pres": {"required": True, "help": "presentation matrix JSON"}},
    )
    add(
        "rtorsion", cmd_rtorsion, "Reidemeister torsion of a metrized complex",
        field=True,
        **{"--complex": {"required": True, "help": "complex JSON (lengths/diffs/grams/cohomology)"}},
    )
    add(
        "euler-check", cmd_euler_check, "Euler-characteristic identity residual",
        field=True,
        **{"--complex": {"required": True, "help": "complex JSON with cohomology data"}},
    )
    add(
        "polylog", cmd_polylog, "Li_n(e^{i theta})",
        **{
            "--n": {"type": int, "required": True},
            "--theta": {"default": None, "help": "angle in (0, 2 pi), decimal"},
            "--theta-over-2pi": {
                "dest": "theta_over_2pi",
                "default": None,
                "help": "rational k/r with theta = 2 pi k/r",
            },
        },
    )
    add("zeta", cmd_zeta, "integer zeta value", **{"--s": {"type": int, "required": True}})
    add("bernoulli", cmd_bernoulli, "exact Bernoulli number", **{"--m": {"type": int, "required": True}})
    add("beta-check", cmd_beta_check, "quadrature vs exact beta integral", **{"--j": {"type": int, "required": True}})
    add(
        "circle-torsion", cmd_circle_torsion, "torsion-form coefficients T_{sigma,j}",
        **{"--r": {"type": int, "required": True}, "--jmax": {"type": int, "default": 4}},
    )
    add(
        "u-coeff", cmd_u_coeff, "the polylogarithmic constants u_j",
        **{"--r": {"type": int, "required": True}, "--j": {"type": int, "required": True}},
    )
    add(
        "regulator-check", cmd_regulator_check, "psi-scaling identity, both sides",
        **{"--r": {"type": int, "required": True}, "--j": {"type": int, "required": True}},
    )
    add(
        "cheeger-muller", cmd_cheeger_muller, "degree-0 torsion cross-check",
        **{"--r": {"type": int, "required": True}},
    )
    add(
        "borel-dims", cmd_borel_dims, "four-periodic dimension table",
        field=True,
        **{"--imax": {"type": int, "default": 13}},
    )
    add(
        "normalize", cmd_normalize, "convert between form normalizations",
        **{
            "--j": {"type": int, "required": True},
            "--value": {"required": True},
            "--from": {"dest": "frm", "required": True, "choices": ("bl", "chern", "igusa", "borel")},
            "--to": {"dest": "to", "required": True, "choices": ("bl", "chern", "igusa", "borel")},
        },
    )
    add("hatcher", cmd_hatcher, "a_k kappa_k zeta(2k+1)", **{"--k": {"type": int, "required": True}})
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    if args.format == "json":
        print(json.dumps(out, indent=2))
    else:
        print(_render_table(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
