"""Reidemeister torsion of finite metrized cochain complexes.

tau is the positive real comparing the metric on the determinant line of a
complex with the metric induced on the determinant line of its cohomology
(with respect to chosen cohomology bases and metrics).  Two independent
algorithms are provided:

  reidemeister         Laplacian route: orthonormalize each degree by the
                       Cholesky factor of its Gram, take pseudo-determinants
                       of the combinatorial Laplacians, and correct by the
                       Gram determinants of the harmonically projected
                       cohomology representatives against the chosen
                       cohomology Grams.

  torsion_by_contraction
                       Basis-chase route: pick orthonormal coimage bases from
                       singular vectors, form per-degree square matrices
                       [d(coimage below) | representatives | coimage] and
                       alternate their absolute determinants.

The sign convention is frozen so that the acyclic complex 0 -> C --z--> C -> 0
with standard metrics has tau = 1/|z|; both routes reproduce it.

Rank decisions (kernel dimensions, singular ranks) refuse to guess: any
eigenvalue or singular value within a factor 10^3 of the cutoff
10^(-digits/2) raises RankAmbiguous.
"""

from __future__ import annotations

from dataclasses import dataclass

from mpmath import mp, mpc, mpf

from .errors import NotPositiveDefinite, RankAmbiguous, ValidationError
from .flatmodel import (
    FormElement,
    PointClass,
    RegulatorLattice,
    _project_mean_zero,
    a_map,
    class_add,
    class_neg,
    cycl_free,
    hermitian_cholesky,
    to_mp,
    zero_class,
)
from .modtors import TorsionPresentation, zhat
from .numfield import FieldElement, NumberField, embed

GUARD = 10

_AMBIGUITY_FACTOR = 1000


def _adj(rows):
    if not rows:
        return ()
    return tuple(
        tuple(mp.conj(rows[i][j]) for i in range(len(rows)))
        for j in range(len(rows[0]))
    )


def _mul(a, b):
    if not a or not b:
        return ()
    n, k, m = len(a), len(b), len(b[0])
    return tuple(
        tuple(mp.fsum(a[i][t] * b[t][j] for t in range(k)) for j in range(m))
        for i in range(n)
    )


def _frob(rows):
    return mp.sqrt(mp.fsum(abs(x) ** 2 for r in rows for x in r)) if rows else mpf(0)


def _upper_inv(u):
    """Inverse of an upper-triangular matrix by back substitution."""
    n = len(u)
    inv = [[mpc(0)] * n for _ in range(n)]
    for c in range(n):
        inv[c][c] = 1 / u[c][c]
        for r in range(c - 1, -1, -1):
            s = mp.fsum(u[r][t] * inv[t][c] for t in range(r + 1, c + 1))
            inv[r][c] = -s / u[r][r]
    return tuple(tuple(row) for row in inv)


def _to_rows(m):
    return tuple(tuple(m[i, j] for j in range(m.cols)) for i in range(m.rows))


@dataclass(frozen=True)
class MetrizedComplexAtPlace:
    """A finite cochain complex over C with Grams and cohomology choices.

    diffs[i] maps degree i to degree i+1 and has shape lengths[i+1] by
    lengths[i]; cohomology_maps[i] has one column per chosen cohomology
    class, each column a cocycle in degree i; cohomology_grams[i] is the
    chosen metric on those classes.
    """

    digits: int
    lengths: tuple
    diffs: tuple
    cochain_grams: tuple
    cohomology_grams: tuple
    cohomology_maps: tuple


def metrized_complex_at_place(
    digits, lengths, diffs, cochain_grams, cohomology_grams, cohomology_maps
) -> MetrizedComplexAtPlace:
    """Validate shapes, d after d = 0, positive Grams, and cocycle columns."""
    lengths = tuple(int(n) for n in lengths)
    nd = len(lengths)
    with mp.workdps(digits + GUARD):
        dd = [tuple(tuple(to_mp(x) for x in row) for row in m) for m in diffs]
        gg = [tuple(tuple(to_mp(x) for x in row) for row in m) for m in cochain_grams]
        hh = [tuple(tuple(to_mp(x) for x in row) for row in m) for m in cohomology_grams]
        kk = [tuple(tuple(to_mp(x) for x in row) for row in m) for m in cohomology_maps]
        if len(dd) != nd - 1 or len(gg) != nd or len(hh) != nd or len(kk) != nd:
            raise ValidationError("degree counts of the complex data disagree")
        for i in range(nd - 1):
            if len(dd[i]) != lengths[i + 1] or any(len(r) != lengths[i] for r in dd[i]):
                raise ValidationError(f"differential {i} has the wrong shape")
        tol = mpf(10) ** (-digits + GUARD)
        for i in range(nd - 2):
            prod = _mul(dd[i + 1], dd[i])
            if _frob(prod) > tol:
                raise ValidationError(f"d{i + 1} after d{i} is not zero")
        for i in range(nd):
            if len(gg[i]) != lengths[i]:
                raise ValidationError(f"cochain Gram {i} has the wrong size")
            if lengths[i] > 0:
                hermitian_cholesky(gg[i], digits)
            h = len(hh[i])
            if h > 0:
                hermitian_cholesky(hh[i], digits)
                if len(kk[i]) != lengths[i]:
                    raise ValidationError(
                        f"cohomology representatives {i} have the wrong height"
                    )
                if any(len(r) != h for r in kk[i]):
                    raise ValidationError(
                        f"cohomology representatives {i} disagree with the Gram size"
                    )
                if i < nd - 1:
                    img = _mul(dd[i], kk[i])
                    if _frob(img) > tol:
                        raise ValidationError(f"a degree-{i} representative is not a cocycle")
            else:
                if any(len(r) for r in kk[i]):
                    raise ValidationError(
                        f"degree {i} provides representatives but no cohomology Gram"
                    )
                kk[i] = ()
    return MetrizedComplexAtPlace(
        digits=digits,
        lengths=lengths,
        diffs=tuple(dd),
        cochain_grams=tuple(gg),
        cohomology_grams=tuple(hh),
        cohomology_maps=tuple(kk),
    )


@dataclass(frozen=True)
class _DegreeData:
    chol: tuple        # lower Cholesky factor of the cochain Gram
    chol_inv_adj: tuple  # inverse of its adjoint (maps tilde coords back)
    reps_tilde: tuple  # representatives in orthonormal coordinates


def _orthonormalize(cplx: MetrizedComplexAtPlace):
    """Per-degree Cholesky data and the differentials in orthonormal coords."""
    degs = []
    for i, n in enumerate(cplx.lengths):
        if n == 0:
            degs.append(_DegreeData((), (), ()))
            continue
        low = hermitian_cholesky(cplx.cochain_grams[i], cplx.digits)
        low = tuple(tuple(row) for row in low)
        upper_inv = _upper_inv(_adj(low))
        reps = _mul(_adj(low), cplx.cohomology_maps[i]) if cplx.cohomology_maps[i] else ()
        degs.append(_DegreeData(low, upper_inv, reps))
    dt = []
    for i in range(len(cplx.lengths) - 1):
        if cplx.lengths[i] == 0 or cplx.lengths[i + 1] == 0:
            dt.append(())
            continue
        dt.append(_mul(_adj(degs[i + 1].chol), _mul(cplx.diffs[i], degs[i].chol_inv_adj)))
    return degs, dt


def _laplacian_spectra(cplx: MetrizedComplexAtPlace, degs, dt):
    """Eigen-decompositions of the Laplacians in orthonormal coordinates."""
    out = []
    for i, n in enumerate(cplx.lengths):
        if n == 0:
            out.append(([], ()))
            continue
        lap = [[mpc(0)] * n for _ in range(n)]
        if i < len(dt) and dt[i]:
            a = _mul(_adj(dt[i]), dt[i])
            for r in range(n):
                for c in range(n):
                    lap[r][c] += a[r][c]
        if i > 0 and dt[i - 1]:
            b = _mul(dt[i - 1], _adj(dt[i - 1]))
            for r in range(n):
                for c in range(n):
                    lap[r][c] += b[r][c]
        evals, q = mp.eighe(mp.matrix(lap))
        out.append(([evals[t] for t in range(n)], _to_rows(q)))
    return out


def _kernel_count(evals, cut, what):
    k = 0
    for lam in evals:
        if cut / _AMBIGUITY_FACTOR < lam < cut * _AMBIGUITY_FACTOR:
            raise RankAmbiguous(f"{what}: eigenvalue {mp.nstr(lam, 8)} sits at the cutoff")
        if lam < cut:
            k += 1
    return k


def cohomology(cplx: MetrizedComplexAtPlace):
    """Kernel dimensions of the Laplacians and orthonormal harmonic bases.

    Returns (dims, bases); bases[i] is a lengths[i] by dims[i] matrix in the
    original coordinates, orthonormal for the degree-i Gram.
    """
    with mp.workdps(cplx.digits + GUARD):
        degs, dt = _orthonormalize(cplx)
        spectra = _laplacian_spectra(cplx, degs, dt)
        cut = mpf(10) ** (-mpf(cplx.digits) / 2)
        dims = []
        bases = []
        for i, (evals, qrows) in enumerate(spectra):
            if not evals:
                dims.append(0)
                bases.append(())
                continue
            h = _kernel_count(evals, cut, f"Laplacian in degree {i}")
            dims.append(h)
            cols = tuple(tuple(row[:h]) for row in qrows)
            bases.append(_mul(degs[i].chol_inv_adj, cols) if h else ())
        return tuple(dims), tuple(bases)


def _check_rep_count(cplx, dims):
    for i, h in enumerate(dims):
        given = len(cplx.cohomology_grams[i])
        if given != h:
            raise ValidationError(
                f"degree {i} supplies {given} cohomology classes but the kernel has dimension {h}"
            )


def reidemeister(cplx: MetrizedComplexAtPlace):
    """tau by the Laplacian formula with the cohomology base-change correction.

    ln tau = (1/2) sum_i (-1)^i [ i * ln det'(Lap_i)
                                  + ln det W_i - ln det H_i ]
    where W_i is the Gram of the harmonic projections of the representative
    columns and H_i the chosen cohomology Gram.
    """
    with mp.workdps(cplx.digits + GUARD):
        degs, dt = _orthonormalize(cplx)
        spectra = _laplacian_spectra(cplx, degs, dt)
        cut = mpf(10) ** (-mpf(cplx.digits) / 2)
        dims = []
        lntau = mpf(0)
        for i, (evals, qrows) in enumerate(spectra):
            sign = -1 if i % 2 else 1
            if not evals:
                dims.append(0)
                continue
            h = _kernel_count(evals, cut, f"Laplacian in degree {i}")
            dims.append(h)
            lndet_prime = mp.fsum(mp.log(lam) for lam in evals if lam > cut)
            lntau += sign * i * lndet_prime / 2
            if h == 0:
                continue
            # harmonic projector in orthonormal coordinates
            zero_cols = tuple(tuple(row[:h]) for row in qrows)
            proj_reps = _mul(zero_cols, _mul(_adj(zero_cols), degs[i].reps_tilde))
            w = _mul(_adj(proj_reps), proj_reps)
            try:
                lndet_w = 2 * mp.fsum(
                    mp.log(r[t].real)
                    for t, r in enumerate(hermitian_cholesky(w, cplx.digits))
                )
            except NotPositiveDefinite as exc:
                raise ValidationError(
                    f"degree-{i} representatives do not project onto a cohomology basis"
                ) from exc
            lndet_h = 2 * mp.fsum(
                mp.log(r[t].real)
                for t, r in enumerate(
                    hermitian_cholesky(cplx.cohomology_grams[i], cplx.digits)
                )
            )
            lntau += sign * (lndet_w - lndet_h) / 2
        _check_rep_count(cplx, dims)
        return mp.exp(lntau)


def torsion_by_contraction(cplx: MetrizedComplexAtPlace):
    """tau by the basis-chase: alternate determinants of per-degree bases.

    In orthonormal coordinates choose, for each i, the coimage basis V_i
    (right singular vectors of d_i with singular value above the cutoff).
    The square matrix M_i = [ d_{i-1} V_{i-1} | K_i | V_i ] expresses a
    combined image/cohomology/coimage basis, with the raw representative
    columns K_i standing in for their harmonic parts (column operations
    against the image block cancel the difference).  Then

      tau = prod |det M_i|^{(-1)^i} * prod (det H_i)^{-(-1)^i / 2}.
    """
    with mp.workdps(cplx.digits + GUARD):
        degs, dt = _orthonormalize(cplx)
        cut = mpf(10) ** (-mpf(cplx.digits) / 2)
        nd = len(cplx.lengths)
        coimage = []
        for i in range(nd - 1):
            if not dt[i]:
                coimage.append(())
                continue
            _, svals, vh = mp.svd_c(mp.matrix([list(r) for r in dt[i]]))
            keep = 0
            for t in range(svals.rows):
                s = svals[t]
                if cut / _AMBIGUITY_FACTOR < s < cut * _AMBIGUITY_FACTOR:
                    raise RankAmbiguous(
                        f"singular value {mp.nstr(s, 8)} of d{i} sits at the cutoff"
                    )
                if s > cut:
                    keep += 1
            rows = _to_rows(vh.H)
            coimage.append(tuple(tuple(row[:keep]) for row in rows) if keep else ())
        lntau = mpf(0)
        for i in range(nd):
            n = cplx.lengths[i]
            sign = -1 if i % 2 else 1
            h = len(cplx.cohomology_grams[i])
            if n == 0:
                if h:
                    raise ValidationError(f"degree {i} is zero but lists cohomology")
                continue
            cols = []
            if i > 0 and coimage[i - 1]:
                img = _mul(dt[i - 1], coimage[i - 1])
                cols.append(img)
            if h:
                cols.append(degs[i].reps_tilde)
            if i < nd - 1 and coimage[i]:
                cols.append(coimage[i])
            width = sum(len(c[0]) for c in cols) if cols else 0
            if width != n:
                raise ValidationError(
                    f"degree {i}: image+cohomology+coimage dimensions {width} != {n}"
                )
            big = [[None] * n for _ in range(n)]
            at = 0
            for block in cols:
                w = len(block[0])
                for r in range(n):
                    for c in range(w):
                        big[r][at + c] = block[r][c]
                at += w
            det = mp.det(mp.matrix(big))
            lntau += sign * mp.log(abs(det))
            if h:
                lndet_h = 2 * mp.fsum(
                    mp.log(r[t].real)
                    for t, r in enumerate(
                        hermitian_cholesky(cplx.cohomology_grams[i], cplx.digits)
                    )
                )
                lntau -= sign * lndet_h / 2
        return mp.exp(lntau)


@dataclass(frozen=True)
class CohomologySpec:
    """Cohomology of one degree of an R-module complex.

    free_reps is a lengths[i] by free_rank matrix of ring elements whose
    columns represent a basis of the free part; free_grams gives one
    free_rank-sized Gram per place representative; torsion, when present, is
    a square presentation of the torsion part (invisible at every place).
    """

    free_rank: int
    free_reps: tuple = ()
    free_grams: tuple = ()
    torsion: TorsionPresentation | None = None


@dataclass(frozen=True)
class MetrizedComplexOverR:
    """Complex of free R-modules with one Gram per place and degree.

    diffs[i] is a lengths[i+1] by lengths[i] matrix of ring elements with
    exact d d = 0; grams[i][k] is the Gram at degree i, place k.  Conjugate
    places carry the conjugated data by construction, so only the
    representatives in Sigma* are stored.
    """

    field: NumberField
    lengths: tuple
    diffs: tuple
    grams: tuple
    cohomology: tuple


def build_complex_over_r(field, lengths, diffs, grams, cohomology) -> MetrizedComplexOverR:
    lengths = tuple(int(n) for n in lengths)
    nd = len(lengths)
    dd = tuple(
        tuple(
            tuple(x if isinstance(x, FieldElement) else field.element(x) for x in row)
            for row in m
        )
        for m in diffs
    )
    if len(dd) != nd - 1:
        raise ValidationError("expected one differential between consecutive degrees")
    for i in range(nd - 1):
        if len(dd[i]) != lengths[i + 1] or any(len(r) != lengths[i] for r in dd[i]):
            raise ValidationError(f"differential {i} has the wrong shape")
    for i in range(nd - 2):
        for r in range(lengths[i + 2]):
            for c in range(lengths[i]):
                acc = field.zero()
                for t in range(lengths[i + 1]):
                    acc = field.add(acc, field.mul(dd[i + 1][r][t], dd[i][t][c]))
                if not acc.is_zero():
                    raise ValidationError(f"d{i + 1} after d{i} is not zero over R")
    gg = tuple(tuple(m for m in per_degree) for per_degree in grams)
    if len(gg) != nd or any(len(per) != field.n_places for per in gg):
        raise ValidationError("expected one Gram per degree and place representative")
    specs = []
    for i, spec in enumerate(cohomology):
        reps = tuple(
            tuple(x if isinstance(x, FieldElement) else field.element(x) for x in row)
            for row in spec.free_reps
        )
        if spec.free_rank:
            if len(reps) != lengths[i] or any(len(r) != spec.free_rank for r in reps):
                raise ValidationError(f"free representatives at degree {i} have the wrong shape")
            if len(spec.free_grams) != field.n_places:
                raise ValidationError(f"free cohomology at degree {i} needs a Gram per place")
        specs.append(
            CohomologySpec(
                free_rank=spec.free_rank,
                free_reps=reps,
                free_grams=tuple(spec.free_grams),
                torsion=spec.torsion,
            )
        )
    if len(specs) != nd:
        raise ValidationError("expected one cohomology description per degree")
    return MetrizedComplexOverR(
        field=field, lengths=lengths, diffs=dd, grams=gg, cohomology=tuple(specs)
    )


def _embed_matrix(field, rows, place):
    return tuple(tuple(embed(field, x, place) for x in row) for row in rows)


def at_place(cplx: MetrizedComplexOverR, place: int) -> MetrizedComplexAtPlace:
    """The embedded metrized complex at one place representative."""
    field = cplx.field
    diffs = [_embed_matrix(field, m, place) for m in cplx.diffs]
    grams = [cplx.grams[i][place] for i in range(len(cplx.lengths))]
    hgrams = []
    hmaps = []
    for i, spec in enumerate(cplx.cohomology):
        if spec.free_rank:
            hgrams.append(spec.free_grams[place])
            hmaps.append(_embed_matrix(field, spec.free_reps, place))
        else:
            hgrams.append(())
            hmaps.append(())
    return metrized_complex_at_place(
        field.digits, cplx.lengths, diffs, grams, hgrams, hmaps
    )


def rtorsion_form(field: NumberField, cplx: MetrizedComplexOverR) -> FormElement:
    """The degree-1 vector of per-place ln tau, in quotient coordinates."""
    with mp.workdps(field.digits + GUARD):
        vals = [
            mp.log(reidemeister(at_place(cplx, k))) for k in range(field.n_places)
        ]
        return FormElement(0, _project_mean_zero(vals), field.digits)


def verify_euler_identity(
    field: NumberField, lattice: RegulatorLattice, cplx: MetrizedComplexOverR
) -> PointClass:
    """Residual of the point-level Euler-characteristic identity.

    residual = sum (-1)^i cycl(V^i) - sum (-1)^i [ cycl(free H^i) + Z(tors H^i) ]
               - a((1/2) ln tau form).
    The identity holds exactly when the residual is the zero class.  The
    torsion-form coefficient is 1/2, the unique value compatible with the
    quarter-log-determinant normalization of the cycle map under metric
    scaling; see the scaling lemma.
    """
    total = zero_class(lattice)
    for i in range(len(cplx.lengths)):
        term = cycl_free(field, lattice, cplx.grams[i])
        total = class_add(total, term if i % 2 == 0 else class_neg(term))
    for i, spec in enumerate(cplx.cohomology):
        if spec.free_rank:
            term = cycl_free(field, lattice, spec.free_grams)
            total = class_add(total, class_neg(term) if i % 2 == 0 else term)
        if spec.torsion is not None:
            term = zhat(field, lattice, spec.torsion)
            total = class_add(total, class_neg(term) if i % 2 == 0 else term)
    half_tau = rtorsion_form(field, cplx).scale(mpf(1) / 2)
    total = class_add(total, class_neg(a_map(lattice, half_tau)))
    return total
