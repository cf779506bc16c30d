"""Command-line interface.

Every command prints one JSON report on stdout.  Exit status is 0 on success,
1 when the input parses but fails a mathematical check, and 2 when the input
is malformed.  Rationals are written as ``"p/q"`` strings.

References to other files inside a JSON input (``"complex": "line.json"``)
are resolved relative to the referring file.  If ``TROPFUND_CACHE_DIR`` is
set, reports are cached there keyed by the command, its options and the
contents of every file it read.
"""

from __future__ import annotations

import functools
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import click

from .bar import BarSetup, LengthCapExceeded, free_rank_if_free, h0_dims
from .connections import (
    ConnectionError_,
    DimMismatch,
    TropConnection,
    hom_direct,
    hom_space,
    hom_via_tensor,
    horizontal_sections,
    is_integrable,
    is_unipotent,
)
from .corpus import bundle
from .descent import (
    DescentObject,
    build_skeleton,
    descent_hom,
    descent_hom_anchored,
    elliptic_extract,
    is_nilpotent,
    is_unipotent_matrix,
    is_unipotent_object,
    validate_object,
)
from .forms import READINGS, ComplexSite, FormAlgebra, fan_site_from_complex, p_forms
from .linalg import fmt
from .matroids import (
    Matroid,
    MatroidError,
    SmoothnessCertificate,
    bergman_fan,
    check_balanced,
    check_smooth_certificate,
    search_certificate,
)
from .polyhedra import ComplexError, NonRationalInput, PolyComplex, parse_polyhedron, validate_complex


class Malformed(Exception):
    """Input that cannot be parsed into the expected schema."""


class Failed(Exception):
    """A check that ran and came out negative; carries the report."""

    def __init__(self, report: dict):
        super().__init__(report.get("message", "check failed"))
        self.report = report


MALFORMED = (NonRationalInput, DimMismatch, LengthCapExceeded)


# ---------------------------------------------------------------------------
# input handling


class Inputs:
    """Loads JSON files and remembers their contents for the cache key."""

    def __init__(self):
        self.read: dict[str, str] = {}

    def load(self, path, relative_to: Path | None = None) -> tuple[dict, Path]:
        p = Path(path)
        if relative_to is not None and not p.is_absolute():
            p = relative_to / p
        try:
            text = p.read_text()
        except OSError as e:
            raise Malformed(f"cannot read {p}: {e.strerror}") from None
        self.read[str(p.resolve())] = hashlib.sha256(text.encode()).hexdigest()
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise Malformed(f"{p}: invalid JSON ({e.msg} at line {e.lineno})") from None
        if not isinstance(data, dict):
            raise Malformed(f"{p}: expected a JSON object")
        return data, p.parent

    def complex(self, ref, basedir: Path) -> tuple[PolyComplex, dict]:
        if isinstance(ref, dict):
            data = ref
        elif isinstance(ref, str):
            data, _ = self.load(ref, basedir)
        else:
            raise Malformed("complex reference must be a file name or an inline object")
        return validate_complex(data), data


def _members(cx: PolyComplex, text: str | None) -> tuple[int, ...]:
    """Parse ``star:<i>``, ``star:@x,y,...``, ``open:i,j,...`` or ``all``."""
    if text is None or text == "all":
        return tuple(range(len(cx.faces)))
    kind, _, rest = text.partition(":")
    try:
        if kind == "star":
            if rest.startswith("@"):
                pt = tuple(Fraction(x) for x in rest[1:].split(","))
                if len(pt) != cx.n:
                    raise Malformed(f"point {rest[1:]} does not have {cx.n} coordinates")
                i = cx.carrier(pt)
                if i is None:
                    raise Failed({"message": f"point {rest[1:]} is not in the complex"})
                return tuple(sorted(cx.up[i]))
            i = int(rest)
            if not 0 <= i < len(cx.faces):
                raise Malformed(f"no face {i}; the complex has {len(cx.faces)} faces")
            return tuple(sorted(cx.up[i]))
        if kind == "open":
            return tuple(sorted({int(x) for x in rest.split(",")}))
    except ValueError:
        raise Malformed(f"cannot parse open set {text!r}") from None
    raise Malformed(f"unknown open set {text!r}; use star:<i>, star:@x,y, open:i,j or all")


def _setup(inp: Inputs, base, basedir: Path) -> BarSetup:
    if not isinstance(base, dict) or "complex" not in base:
        raise Malformed('a connection needs "base": {"complex": ..., "open": ...}')
    cx, _ = inp.complex(base["complex"], basedir)
    site = ComplexSite(cx, base.get("reading", "open"))
    return BarSetup.from_algebra(FormAlgebra(site, _members(cx, base.get("open"))))


def _connection(inp: Inputs, path) -> TropConnection:
    data, d = inp.load(path)
    try:
        return TropConnection.from_json(data, _setup(inp, data.get("base"), d))
    except (KeyError, TypeError) as e:
        raise Malformed(f"{path}: bad connection ({e})") from None


def _object(inp: Inputs, path, skeleton=None):
    data, d = inp.load(path)
    if "complex" not in data:
        raise Malformed(f'{path}: a descent object needs "complex"')
    cx, raw = inp.complex(data["complex"], d)
    if skeleton is None or skeleton[1] != raw:
        skeleton = (build_skeleton(cx, data.get("reading", "open")), raw)
    try:
        return DescentObject.from_json(data, skeleton[0]), skeleton
    except (KeyError, TypeError) as e:
        raise Malformed(f"{path}: bad descent object ({e})") from None


def _mat(m) -> list:
    return [[fmt(x) for x in r] for r in m]


def _basis(sub) -> list:
    return [[fmt(x) for x in b] for b in sub.basis]


# ---------------------------------------------------------------------------
# output, errors and caching


def _cache_path(name: str, params: dict) -> Path | None:
    root = os.environ.get("TROPFUND_CACHE_DIR")
    if not root:
        return None
    key = {"command": name, "params": params, "cwd": os.getcwd()}
    for v in params.values():
        if isinstance(v, str) and os.path.isfile(v):
            key[v] = Path(v).read_text()
    h = hashlib.sha256(json.dumps(key, sort_keys=True, default=str).encode()).hexdigest()
    return Path(root) / f"{h}.json"


def _cache_lookup(path: Path | None):
    if path is None or not path.is_file():
        return None
    try:
        entry = json.loads(path.read_text())
        for f, digest in entry["deps"].items():
            if hashlib.sha256(Path(f).read_bytes()).hexdigest() != digest:
                return None
        return entry
    except (OSError, ValueError, KeyError):
        return None


def _cache_store(path: Path | None, inp: Inputs, report: dict, code: int) -> None:
    if path is None:
        return
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps({"deps": inp.read, "report": report, "code": code}))
    except OSError:
        pass


def _emit(report: dict, code: int) -> None:
    click.echo(json.dumps(report, indent=2, sort_keys=False))
    sys.exit(code)


def reporting(cacheable: bool = True):
    """Run a command body ``f(inp, **params) -> report`` with uniform error handling."""

    def deco(f):
        @functools.wraps(f)
        def wrapper(**params):
            name = click.get_current_context().info_name
            cpath = _cache_path(name, params) if cacheable else None
            hit = _cache_lookup(cpath)
            if hit is not None:
                _emit(hit["report"], hit["code"])
            inp = Inputs()
            try:
                report, code = f(inp, **params), 0
            except Failed as e:
                report, code = e.report, 1
            except Malformed as e:
                report, code = {"error": "Malformed", "message": str(e)}, 2
            except MALFORMED as e:
                report = getattr(e, "report", None) or {"message": str(e)}
                report, code = {"error": type(e).__name__, **report}, 2
            except (ComplexError, MatroidError, ConnectionError_) as e:
                report, code = {"error": type(e).__name__, **e.report}, 1
            except (ValueError, KeyError, TypeError) as e:
                report, code = {"error": type(e).__name__, "message": str(e)}, 2
            _cache_store(cpath, inp, report, code)
            _emit(report, code)

        return wrapper

    return deco


# ---------------------------------------------------------------------------
# commands


@click.group()
@click.version_option(package_name="tropfund")
def main():
    """Tropical forms, connections, bar complexes and descent data."""


@main.command()
@click.argument("complex_file", type=click.Path())
@reporting()
def validate(inp, complex_file):
    """Validate a polyhedral complex and report face counts."""
    data, _ = inp.load(complex_file)
    cx = validate_complex(data)
    counts: dict[int, int] = {}
    for f in cx.faces:
        counts[f.dim] = counts.get(f.dim, 0) + 1
    return {
        "valid": True,
        "rank": cx.n,
        "faces": len(cx.faces),
        "faces_by_dim": [counts.get(d, 0) for d in range(max(counts) + 1)],
        "maximal": len(cx.maximal),
        "pure": cx.is_pure,
        "fan": cx.is_fan,
    }


@main.command()
@click.argument("complex_file", type=click.Path())
@click.option("--open", "open_", default="all", help="star:<i>, star:@x,y, open:i,j or all.")
@click.option("--p", "p", default=1, show_default=True, type=click.IntRange(0))
@click.option("--reading", type=click.Choice(READINGS), default="open", show_default=True)
@click.option("--route", type=click.Choice(["complex", "fan"]), default="complex", show_default=True,
              help="fan: treat a fan as a trivially enriched fan.")
@reporting()
def forms(inp, complex_file, open_, p, reading, route):
    """Dimension and basis of the degree-p forms on an open set."""
    data, _ = inp.load(complex_file)
    cx = validate_complex(data)
    site = fan_site_from_complex(cx) if route == "fan" else ComplexSite(cx, reading)
    fs = p_forms(site, _members(cx, open_), p)
    return {**fs.to_json(), "open": open_}


@main.command("bar-dims")
@click.argument("complex_file", type=click.Path())
@click.option("--max-len", default=4, show_default=True, type=click.IntRange(0))
@click.option("--open", "open_", default="all", help="star:<i>, star:@x,y, open:i,j or all.")
@click.option("--reading", type=click.Choice(READINGS), default="open", show_default=True)
@reporting()
def bar_dims(inp, complex_file, max_len, open_, reading):
    """Dimensions of H^0 of the bar complex by length."""
    data, _ = inp.load(complex_file)
    cx = validate_complex(data)
    setup = BarSetup.from_algebra(FormAlgebra(ComplexSite(cx, reading), _members(cx, open_)))
    dims = [d for d, _ in h0_dims(setup, max_len)]
    return {"lengths": list(range(max_len + 1)), "dims": dims, "free_rank_if_free": free_rank_if_free(setup)}


@main.command()
@click.option("--matroid", "matroid_file", required=True, type=click.Path())
@click.option("--out", type=click.Path(), help="Also write the fan to this file.")
@reporting(cacheable=False)
def bergman(inp, matroid_file, out):
    """Bergman fan of a matroid, as a complex."""
    data, _ = inp.load(matroid_file)
    fan = bergman_fan(Matroid.from_json(data)).to_json()
    if out:
        Path(out).write_text(json.dumps(fan, indent=2) + "\n")
    return fan


@main.command("check-balanced")
@click.argument("complex_file", type=click.Path())
@reporting()
def check_balanced_cmd(inp, complex_file):
    """Balancing condition with the given weights."""
    data, _ = inp.load(complex_file)
    rep = check_balanced(validate_complex(data))
    if not rep["balanced"]:
        raise Failed(rep)
    return rep


@main.command("check-smooth")
@click.argument("complex_file", type=click.Path())
@click.option("--certificate", type=click.Path(), help="Certificate file {face, matroid, basis}.")
@click.option("--search", "face", help="Search for a certificate at this face (index or x,y,... of a vertex).")
@reporting()
def check_smooth(inp, complex_file, certificate, face):
    """Check (or search for) a matroidal smoothness certificate at a face."""
    data, _ = inp.load(complex_file)
    cx = validate_complex(data)
    if (certificate is None) == (face is None):
        raise Malformed("give exactly one of --certificate and --search")
    if certificate is not None:
        cdata, _ = inp.load(certificate)
        try:
            cert = SmoothnessCertificate.from_json(cdata, cx)
        except (KeyError, TypeError) as e:
            raise Malformed(f"bad certificate ({e})") from None
        ok = check_smooth_certificate(cx, cert)
        rep = {"smooth": ok, "face": cert.face}
    else:
        if "," in face or face.startswith("["):
            idx = cx.index(parse_polyhedron(cx.n, {"vertices": [face.strip("[]").split(",")]}))
        else:
            idx = int(face)
        cert = search_certificate(cx, idx)
        ok = cert is not None
        rep = {"smooth": ok, "face": idx}
        if ok:
            rep["certificate"] = {"matroid": cert.matroid.to_json(), "basis": _mat(cert.basis)}
    if not ok:
        raise Failed(rep)
    return rep


@main.command("connection-check")
@click.argument("connection_file", type=click.Path())
@reporting()
def connection_check(inp, connection_file):
    """Integrability and unipotence of a connection."""
    c = _connection(inp, connection_file)
    ok, wit = is_integrable(c)
    rep = {"rank": c.rank, "integrable": ok}
    if not ok:
        rep["witness"] = {"omega2_index": wit["omega2_index"], "coefficient": _mat(wit["coefficient"])}
        raise Failed(rep)
    uni, flag = is_unipotent(c)
    rep["unipotent"] = uni
    rep["filtration_dims"] = [f.dim for f in flag] if flag else None
    return rep


@main.command()
@click.argument("connection_file", type=click.Path())
@reporting()
def horizontal(inp, connection_file):
    """Horizontal sections of an integrable connection."""
    c = _connection(inp, connection_file)
    ok, _ = is_integrable(c)
    if not ok:
        raise Failed({"integrable": False, "message": "connection is not integrable"})
    h = horizontal_sections(c)
    return {"dim": h.dim, "basis": _basis(h)}


@main.command()
@click.argument("source", type=click.Path())
@click.argument("target", type=click.Path())
@reporting()
def hom(inp, source, target):
    """Morphisms between two connections over the same base.

    A basis vector x encodes T with T[j][i] = x[i * r2 + j].
    """
    c1, c2 = _connection(inp, source), _connection(inp, target)
    h = hom_space(c1, c2)
    return {"dim": h.dim, "basis": _basis(h),
            "routes": {"direct": hom_direct(c1, c2).dim, "tensor": hom_via_tensor(c1, c2).dim}}


@main.command("descent-validate")
@click.argument("object_file", type=click.Path())
@reporting()
def descent_validate(inp, object_file):
    """Check a descent object: integrability, intertwining on edges and cocycles."""
    obj, _ = _object(inp, object_file)
    rep = validate_object(obj)
    if not rep["valid"]:
        raise Failed(rep)
    return rep


@main.command("descent-hom")
@click.argument("source", type=click.Path())
@click.argument("target", type=click.Path())
@reporting()
def descent_hom_cmd(inp, source, target):
    """Morphisms of descent objects, by a global system and by tree transport."""
    o1, sk = _object(inp, source)
    o2, _ = _object(inp, target, sk)
    for o in (o1, o2):
        rep = validate_object(o)
        if not rep["valid"]:
            raise Failed(rep)
    h = descent_hom(o1, o2)
    return {"dim": h.dim, "basis": _basis(h),
            "routes": {"global": h.dim, "anchored": descent_hom_anchored(o1, o2).dim}}


@main.command("descent-unipotent")
@click.argument("object_file", type=click.Path())
@reporting()
def descent_unipotent(inp, object_file):
    """Whether a descent object is an iterated extension of unit objects."""
    obj, _ = _object(inp, object_file)
    rep = validate_object(obj)
    if not rep["valid"]:
        raise Failed(rep)
    ok, flag = is_unipotent_object(obj)
    return {"unipotent": ok, "filtration_dims": [[f.dim for f in step] for step in flag] if flag else None}


@main.command("elliptic-extract")
@click.argument("object_file", type=click.Path())
@reporting()
def elliptic_extract_cmd(inp, object_file):
    """Normal form (S, T) of a descent object on a genus-one cycle."""
    obj, _ = _object(inp, object_file)
    rep = validate_object(obj)
    if not rep["valid"]:
        raise Failed(rep)
    S, T = elliptic_extract(obj)
    return {"S": _mat(S), "T": _mat(T), "S_nilpotent": is_nilpotent(S), "T_unipotent": is_unipotent_matrix(T)}


@main.command()
@click.option("--out", "out_dir", default="examples-out", show_default=True, type=click.Path())
@reporting(cacheable=False)
def examples(inp, out_dir):
    """Write the bundled example inputs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = bundle()
    for name, data in files.items():
        (out / name).write_text(json.dumps(data, indent=2) + "\n")
    return {"directory": str(out), "written": sorted(files)}


if __name__ == "__main__":
    main()
