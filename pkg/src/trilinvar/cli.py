"""Command-line driver: ``trilinvar <command> [options]``.

Exit status is 0 on success, 1 when a verification fails and 2 on usage
errors (bad flags, unreadable or malformed input files).
"""

import logging
import os
import sys
import time
from pathlib import Path

import click

EXIT_OK, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2
_THREAD_VARS = ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS")


def _apply_thread_cap():
    """Honour TRILINVAR_THREADS by capping the BLAS pools (only effective before numpy loads)."""
    cap = os.environ.get("TRILINVAR_THREADS")
    if not cap:
        return None
    try:
        n = int(cap)
    except ValueError:
        raise click.UsageError(f"TRILINVAR_THREADS must be a positive integer, got {cap!r}")
    if n < 1:
        raise click.UsageError("TRILINVAR_THREADS must be a positive integer")
    for var in _THREAD_VARS:
        os.environ[var] = str(n)
    return n


def _prime(ctx, param, value):
    from .linalg import _check_prime
    from .monomials import InvalidInput

    try:
        return _check_prime(value)
    except InvalidInput as exc:
        raise click.BadParameter(str(exc))


def _out_dir(path):
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _fail(msg):
    click.echo(f"FAIL: {msg}", err=True)
    sys.exit(EXIT_VERIFY)


def _read_poly(path):
    from .io import load_polynomial
    from .monomials import InvalidInput

    try:
        return load_polynomial(path)
    except (InvalidInput, ValueError) as exc:
        raise click.UsageError(f"{path}: {exc}")


out_option = click.option("--out", "out", default="out", show_default=True,
                          type=click.Path(file_okay=False), help="Output directory.")
degree_option = click.option("--degree", type=click.IntRange(0, 12), required=True,
                             help="Total degree N.")
prime_option = click.option("--prime", default=101, show_default=True, type=int, callback=_prime,
                            help="Odd prime for modular elimination.")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
@click.version_option(package_name="trilinvar")
def main(verbose):
    """Exact computation of the degree 6, 9 and 12 invariants of 3x3x3 arrays."""
    _apply_thread_cap()
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


@main.command()
@degree_option
@out_option
def basis(degree, out):
    """Write the weight-zero and six higher-weight monomial lists."""
    from .io import write_manifest, write_monomials
    from .monomials import OPERATORS, DegreeBasis

    t0 = time.perf_counter()
    out = _out_dir(out)
    if degree % 3:
        click.echo(f"warning: degree {degree} is not a multiple of 3, weight-zero list is empty", err=True)
    B = DegreeBasis(degree)
    files = [out / f"basis_deg{degree}_w0.txt"]
    write_monomials(files[0], B.weight_zero)
    counts = {"weight_zero": len(B.weight_zero)}
    for ell, m in OPERATORS:
        path = out / f"basis_deg{degree}_l{ell}m{m}.txt"
        write_monomials(path, B.higher((ell, m)))
        files.append(path)
        counts[f"l{ell}m{m}"] = len(B.higher((ell, m)))
    click.echo(" ".join(f"{k}={v}" for k, v in counts.items()))
    write_manifest(out, "basis", {"degree": degree}, counts, files,
                   {"seconds": round(time.perf_counter() - t0, 3)})


@main.command()
@degree_option
@out_option
def orbits(degree, out):
    """Write the orbit decomposition of the weight-zero monomials."""
    from .io import write_manifest
    from .monomials import format_monomial
    from .symmetry import orbit_decomposition

    if degree % 3:
        raise click.UsageError("orbits need a degree divisible by 3")
    t0 = time.perf_counter()
    out = _out_dir(out)
    D = orbit_decomposition(degree)
    path = out / f"orbits_deg{degree}.tsv"
    with open(path, "w", newline="\n") as fh:
        fh.write("# min_rep\tsize\n")
        for o in D:
            fh.write(f"{format_monomial(o.min_rep)}\t{o.size}\n")
    total = sum(o.size for o in D)
    click.echo(f"orbits={len(D)} monomials={total}")
    write_manifest(out, "orbits", {"degree": degree}, {"orbits": len(D), "monomials": total}, [path],
                   {"seconds": round(time.perf_counter() - t0, 3)})


def _record_files(out, rec, fmt, nonzero_only=False):
    from .io import write_expanded, write_orbit_table

    files = []
    if fmt in ("orbit", "both"):
        path = out / f"{rec.name}.orbits"
        write_orbit_table(path, rec, nonzero_only)
        files.append(path)
    if fmt in ("expanded", "both"):
        path = out / f"{rec.name}.expanded"
        write_expanded(path, rec)
        files.append(path)
    return files


def _stable_meta(meta):
    return {k: v for k, v in meta.items() if k != "seconds"}


@main.command()
@click.option("--degree", type=click.Choice(["3", "6", "9", "12"]), required=True)
@prime_option
@click.option("--mode", type=click.Choice(["orbit-fast", "full-basis"]), default="orbit-fast",
              show_default=True, help="Degree-9 elimination route.")
@click.option("--format", "fmt", type=click.Choice(["orbit", "expanded", "both"]), default="both",
              show_default=True)
@out_option
def compute(degree, prime, mode, fmt, out):
    """Compute the invariants of one degree and write them."""
    from .io import write_manifest
    from .pipeline import PipelineError, compute_I6, compute_I9, compute_I12_pair, nullspace_dimension

    degree = int(degree)
    t0 = time.perf_counter()
    out = _out_dir(out)
    params = {"degree": degree, "prime": prime, "mode": mode, "format": fmt}
    files, results = [], {}
    try:
        if degree == 3:
            dim = nullspace_dimension(3, prime)
            results = {"nullspace_dim": dim}
            click.echo(f"degree 3: nullspace dimension {dim}")
            if dim != 0:
                _fail("degree-3 nullspace should be zero")
        elif degree == 6:
            rec = compute_I6(prime)
            files += _record_files(out, rec, fmt)
            results = {"I6": _stable_meta(rec.meta) | {"terms": len(rec.expanded)}}
        elif degree == 9:
            rec = compute_I9(mode, prime)
            files += _record_files(out, rec, fmt, nonzero_only=True)
            results = {"I9": _stable_meta(rec.meta) | {"terms": len(rec.expanded)}}
        else:
            recs = compute_I12_pair(prime)
            for rec in recs:
                files += _record_files(out, rec, fmt)
                results[rec.name] = _stable_meta(rec.meta) | {"terms": len(rec.expanded)}
    except PipelineError as exc:
        _fail(str(exc))
    for name, res in results.items():
        if isinstance(res, dict):
            click.echo(f"{name}: {res.get('terms')} terms")
    write_manifest(out, "compute", params, results, files, {"seconds": round(time.perf_counter() - t0, 3)})


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
def verify(path):
    """Check that an invariant file is annihilated by all six raising operators."""
    from .pipeline import verify_annihilation

    _fields, poly = _read_poly(path)
    if poly.is_zero():
        _fail("polynomial is zero")
    report = verify_annihilation(poly)
    for op, img in report.images.items():
        click.echo(f"T({op[0]},{op[1]}): {'ok' if img.is_zero() else f'{len(img)} nonzero terms'}")
    if not report.ok:
        _fail(f"{len(poly)}-term polynomial is not annihilated")
    click.echo(f"OK {len(poly)} terms annihilated")


def _relation_text(a, b):
    """Render I6^2 = b*I'12 + a*I12."""
    def term(c, name, first):
        if c == 0:
            return ""
        sign = "-" if c < 0 else ("" if first else "+")
        mag = abs(c)
        body = name if mag == 1 else f"{mag}*{name}"
        return f"{sign}{body}" if first else f" {sign} {body}"
    rhs = term(b, "I'12", True) + term(a, "I12", b == 0)
    return f"I6^2 = {rhs or '0'}"


@main.command()
@click.option("--from", "src", type=click.Path(exists=True, file_okay=False), default=None,
              help="Directory with I6/I12/I12prime files from earlier compute runs.")
@prime_option
@click.option("--out", "out", default=None, type=click.Path(file_okay=False),
              help="Write a manifest here.")
def relation(src, prime, out):
    """Express I6^2 in terms of I12 and I12'."""
    from .pipeline import PipelineError, compute_I6, compute_I12_pair, relation_from_polynomials

    t0 = time.perf_counter()
    try:
        if src is not None:
            polys = [_find_invariant(Path(src), name) for name in ("I6", "I12", "I12prime")]
        else:
            i6 = compute_I6(prime)
            i12, i12p = compute_I12_pair(prime)
            polys = [i6.expanded, i12.expanded, i12p.expanded]
        rep = relation_from_polynomials(*polys)
    except PipelineError as exc:
        _fail(str(exc))
    text = _relation_text(rep.a, rep.b)
    click.echo(text)
    if out is not None:
        from .io import write_manifest
        write_manifest(_out_dir(out), "relation", {"prime": prime, "from": src},
                       {"a": rep.a, "b": rep.b, "residual_terms": len(rep.residual), "relation": text},
                       [], {"seconds": round(time.perf_counter() - t0, 3)})
    if not rep.ok:
        _fail(f"residual has {len(rep.residual)} terms")


def _find_invariant(directory, name):
    for suffix in (".expanded", ".orbits"):
        path = directory / f"{name}{suffix}"
        if path.exists():
            return _read_poly(path)[1]
    raise click.UsageError(f"no {name}.expanded or {name}.orbits in {directory}")


@main.command(name="eval")
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.argument("array", type=click.Path(exists=True, dir_okay=False))
def eval_cmd(path, array):
    """Evaluate an invariant file at a 3x3x3 integer array given as JSON."""
    from .action import load_array
    from .monomials import InvalidInput
    from .polynomial import evaluate

    _fields, poly = _read_poly(path)
    try:
        X = load_array(array)
    except (InvalidInput, ValueError) as exc:
        raise click.UsageError(str(exc))
    click.echo(evaluate(poly, X))


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False))
@click.option("--trials", default=100, show_default=True, type=click.IntRange(1))
@click.option("--seed", default=0, show_default=True, type=int)
def invariance(path, trials, seed):
    """Randomized check that an invariant file is fixed by SL3 x SL3 x SL3."""
    from .action import invariance_test

    _fields, poly = _read_poly(path)
    if not poly.is_homogeneous():
        raise click.UsageError("invariance test needs a homogeneous polynomial")
    report = invariance_test(poly, trials, seed)
    click.echo(f"{report.passed}/{report.trials} trials passed (seed {seed})")
    if not report.ok:
        ce = report.counterexample
        click.echo(f"first failure at trial {ce['trial']}: {ce['before']} != {ce['after']}", err=True)
        sys.exit(EXIT_VERIFY)


if __name__ == "__main__":
    main()
