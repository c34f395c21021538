"""C emission: function bodies for plans, in-place rewriting of annotated
sources, and a cycle-counter benchmark harness."""

from __future__ import annotations

import random
import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .analysis import count_ops
from .annotations import scan_source
from .errors import EmptySchemeList, InputError, NoAnnotatedFunctions, SignatureMismatch, UnsupportedDegree
from .expr import (
    CoefficientAtom,
    Expression,
    IntegerLiteral,
    Negation,
    Polynomial,
    Power,
    Product,
    Sum,
    normalize,
)
from .schemes import SCHEMES, Add, Const, EvalDag, Input, Mul, build

INDENT = "  "
MAX_BENCH_DEGREE = 64


@dataclass(frozen=True)
class Signature:
    return_type: str
    function_name: str
    parameters: Tuple[Tuple[str, str], ...]

    def header(self) -> str:
        params = ", ".join(f"{t} {n}" for t, n in self.parameters) or "void"
        return f"{self.return_type} {self.function_name}({params})"


@dataclass
class EmittedUnit:
    body: str
    text: str
    scheme_name: str
    function_name: str
    adds: int
    muls: int


# -- coefficient expressions in C -------------------------------------------

def c_expression(expr: Expression) -> str:
    """C text for a variable-free coefficient; powers become repeated products."""
    if isinstance(expr, (CoefficientAtom, IntegerLiteral)):
        return _c_operand(expr, "")
    if isinstance(expr, Sum):
        if isinstance(expr.right, Negation):
            return f"{c_expression(expr.left)} - {_c_operand(expr.right.child, '+')}"
        return f"{c_expression(expr.left)} + {_c_operand(expr.right, '+')}"
    if isinstance(expr, Product):
        return f"{_c_operand(expr.left, '*l')}*{_c_operand(expr.right, '*r')}"
    if isinstance(expr, Negation):
        return f"-{_c_operand(expr.child, '-')}"
    if isinstance(expr, Power):
        if expr.exponent == 0:
            return "1"
        return "*".join([_c_operand(expr.base, "*r")] * expr.exponent)
    raise SignatureMismatch(f"cannot emit {expr!r} as a constant")


# Which operand kinds need parentheses in each position.
_WRAP = {
    "+": (Sum,),
    "*l": (Sum,),
    "*r": (Sum, Product, Power, Negation),
    "-": (Sum, Product, Power, Negation),
}


def _c_operand(expr: Expression, position: str) -> str:
    if isinstance(expr, CoefficientAtom):
        return expr.name
    if isinstance(expr, IntegerLiteral):
        return str(expr.value)
    text = c_expression(expr)
    if isinstance(expr, Power) and expr.exponent < 2 and position != "*r":
        return text
    if isinstance(expr, _WRAP.get(position, ())):
        return f"({text})"
    return text


# -- body emission ----------------------------------------------------------

def _fresh(name: str, taken: set) -> str:
    out = name
    while out in taken:
        out += "_"
    taken.add(out)
    return out


class _Emitter:
    def __init__(self, dag: EvalDag, sig, newline: str = "\n"):
        self.dag = dag
        self.sig = sig
        self.ctype = sig.return_type
        self.taken = {n for _, n in sig.parameters} | set(dag.coefficient_names())
        self.names: Dict[int, str] = {}
        self.hoisted: List[str] = []
        self._setup_leaves()

    def _setup_leaves(self):
        params = {n for _, n in self.sig.parameters}
        k = 0
        for i, n in enumerate(self.dag.nodes):
            if isinstance(n, Input):
                if n.name not in params:
                    raise SignatureMismatch(
                        f"plan reads {n.name!r} but {self.sig.function_name} has no such parameter"
                    )
                self.names[i] = n.name
            elif isinstance(n, Const):
                text = c_expression(n.value)
                if re.search(r"[*+]", text):
                    name = _fresh(f"_k{k}", self.taken)
                    k += 1
                    self.hoisted.append(f"const {self.ctype} {name} = {text};")
                    self.names[i] = name
                elif isinstance(n.value, (CoefficientAtom, IntegerLiteral)):
                    self.names[i] = text
                else:
                    self.names[i] = f"({text})"

    def render(self, i: int) -> str:
        if i in self.names:
            return self.names[i]
        n = self.dag.nodes[i]
        left = self.render(n.left)
        right = self.render(n.right)
        inl = lambda j, kinds: j not in self.names and isinstance(self.dag.nodes[j], kinds)  # noqa: E731
        if isinstance(n, Add):
            if inl(n.right, Add):
                right = f"({right})"
            return f"{left} + {right}"
        if inl(n.left, Add):
            left = f"({left})"
        if inl(n.right, (Add, Mul)):
            right = f"({right})"
        return f"{left}*{right}"

    def _decls(self, names: Sequence[str]) -> List[str]:
        return [f"{self.ctype} {', '.join(names)};"]

    def leaf_body(self) -> List[str]:
        # a constant plan leaves the parameters unread
        unused = [f"(void){n};" for _, n in self.sig.parameters if n not in self.dag.inputs()]
        return self.hoisted + unused + [f"return {self.render(self.dag.root)};"]

    def expression_body(self) -> List[str]:
        res = _fresh("res", self.taken)
        return (
            self.hoisted
            + self._decls([res])
            + ["", f"{res} = {self.render(self.dag.root)};", "", f"return {res};"]
        )

    def locals_body(self) -> List[str]:
        uses = self.dag.use_counts()
        res = _fresh("res", self.taken)
        stmts = []
        names = []
        k = 0
        for i, n in enumerate(self.dag.nodes):
            if not isinstance(n, (Add, Mul)) or i == self.dag.root or uses[i] < 2:
                continue
            expr = self.render(i)
            name = _fresh(f"t{k}", self.taken)
            k += 1
            self.names[i] = name
            names.append(name)
            stmts.append(f"{name} = {expr};")
        stmts.append(f"{res} = {self.render(self.dag.root)};")
        return self.hoisted + self._decls(names + [res]) + [""] + stmts + ["", f"return {res};"]

    def accumulator_body(self) -> Optional[List[str]]:
        """Accumulator form ``res = A0; res += A1*x; _x = x*x; ...``; None if the
        plan is not an accumulation over a single running power."""
        dag = self.dag
        nodes = dag.nodes
        chain = []
        i = dag.root
        while isinstance(nodes[i], Add):
            chain.append(i)
            i = nodes[i].left
        first = i
        chain.reverse()
        x_nodes = {j for j, n in enumerate(nodes) if isinstance(n, Input)}
        powers = set()
        for j, n in enumerate(nodes):
            if isinstance(n, Mul) and n.left in x_nodes | powers and n.right in x_nodes | powers:
                powers.add(j)
        terms = [first] + [nodes[a].right for a in chain]
        if terms != sorted(set(terms)):
            return None

        res = _fresh("res", self.taken)
        px = _fresh("_x", self.taken)
        stmts: List[str] = []
        current = None
        term_text = {}
        for t in terms:
            n = nodes[t]
            if isinstance(n, Const):
                term_text[t] = self.names[t]
            elif isinstance(n, Mul) and isinstance(nodes[n.left], Const):
                if n.right in x_nodes:
                    term_text[t] = f"{self.names[n.left]}*{self.names[n.right]}"
                elif n.right in powers:
                    term_text[t] = (self.names[n.left], n.right)
                else:
                    return None
            else:
                return None
        emitted = set()
        order = sorted(set(terms) | powers)
        for j in order:
            n = nodes[j]
            if j in powers:
                if n.left in x_nodes and n.right in x_nodes:
                    stmts.append(f"{px} = {self.names[n.left]}*{self.names[n.right]};")
                elif n.left == current and n.right in x_nodes:
                    stmts.append(f"{px} *= {self.names[n.right]};")
                else:
                    return None
                current = j
            elif j in term_text:
                text = term_text[j]
                if isinstance(text, tuple):
                    coeff, pw = text
                    if pw != current:
                        return None
                    text = f"{coeff}*{px}"
                if j == first:
                    stmts.append(f"{res} = {text};")
                else:
                    stmts.append(f"{res} += {text};")
                emitted.add(j)
        if len(emitted) != len(terms):
            return None
        decl = [res, px] if powers else [res]
        return self.hoisted + self._decls(decl) + [""] + stmts + ["", f"return {res};"]


def _format_body(lines: List[str], newline: str) -> str:
    out = [INDENT + ln if ln else "" for ln in lines]
    return newline + newline.join(out) + newline


def emit_function(dag: EvalDag, fn, newline: str = "\n") -> EmittedUnit:
    """Emit a C body for ``dag`` under the signature of ``fn`` (an
    :class:`AnnotatedFunction` or :class:`Signature`)."""
    em = _Emitter(dag, fn)
    root = dag.nodes[dag.root]
    if isinstance(root, (Input, Const)):
        lines = em.leaf_body()
    elif dag.scheme == "incremental":
        lines = em.accumulator_body() or _Emitter(dag, fn).locals_body()
    elif dag.scheme in ("naive", "horner") and all(u < 2 for i, u in enumerate(dag.use_counts())
                                                  if isinstance(dag.nodes[i], (Add, Mul))):
        lines = em.expression_body()
    else:
        lines = em.locals_body()
    body = _format_body(lines, newline)
    header = f"{fn.return_type} {fn.function_name}({', '.join(f'{t} {n}' for t, n in fn.parameters) or 'void'})"
    adds, muls = count_ops(dag)
    return EmittedUnit(
        body=body,
        text=f"{header}{newline}{{{body}}}{newline}",
        scheme_name=dag.scheme,
        function_name=fn.function_name,
        adds=adds,
        muls=muls,
    )


def count_text_ops(body: str) -> Tuple[int, int]:
    """Count ``+``/``+=`` and ``*``/``*=`` tokens in emitted C, ignoring
    comments and hoisted ``const`` coefficient lines."""
    from .annotations import _strip_comments

    adds = muls = 0
    for line in _strip_comments(body).splitlines():
        if line.strip().startswith("const "):
            continue
        adds += len(re.findall(r"\+=?", line)) - 2 * len(re.findall(r"\+\+", line))
        muls += line.count("*")
    return adds, muls


# -- source transformation --------------------------------------------------

def transform_source(file_text: str, scheme: str, sparse: bool = False) -> str:
    functions = scan_source(file_text)
    if not functions:
        raise NoAnnotatedFunctions("no annotated functions found")
    newline = "\r\n" if "\r\n" in file_text else "\n"
    out = file_text
    for fn in sorted(functions, key=lambda f: f.body_span[0], reverse=True):
        poly = normalize(fn.math, fn.ring, fn.variable)
        unit = emit_function(build(poly, scheme, sparse), fn, newline)
        a, b = fn.body_span
        out = out[:a] + unit.body + out[b:]
    return out


# -- benchmark harness ------------------------------------------------------

_BENCH_TEMPLATE = """\
/* Polynomial evaluation benchmark: degree {degree}, {width}-bit results,
 * {iterations} evaluations per timed run, best of {repetitions} runs.
 * Prints one "scheme,cycles" line per scheme, then OK or MISMATCH.
 * Define BENCH_PORTABLE_CLOCK to time with clock_gettime instead of the TSC,
 * BENCH_DUMP_OUTPUTS to also print the first scheme's results.
 */
#define _POSIX_C_SOURCE 199309L
#include <stdint.h>
#include <stdio.h>

#define ITERATIONS {iterations}
#define REPETITIONS {repetitions}
#define N_SCHEMES {n_schemes}
#define INPUT_SEED UINT64_C({input_seed})

/* unsigned so overflow wraps; at least as wide as int to avoid promotion */
typedef {word_t} word_t;
typedef {result_t} result_t;

{coefficients}

#if !defined(BENCH_PORTABLE_CLOCK) && (defined(__x86_64__) || defined(__i386__))
#include <x86intrin.h>
/* rdtscp waits for all earlier instructions to retire */
static uint64_t read_counter(void)
{{
  unsigned int aux;
  return __rdtscp(&aux);
}}
#else
#include <time.h>
static uint64_t read_counter(void)
{{
  struct timespec ts;
  clock_gettime(CLOCK_MONOTONIC, &ts);
  return (uint64_t)ts.tv_sec * UINT64_C(1000000000) + (uint64_t)ts.tv_nsec;
}}
#endif

#if defined(__GNUC__)
#define NOINLINE __attribute__((noinline))
#else
#define NOINLINE
#endif

{functions}
typedef word_t (*poly_fn)(word_t);

static const struct {{
  const char *name;
  poly_fn fn;
}} schemes[N_SCHEMES] = {{
{table}
}};

static word_t inputs[ITERATIONS];
static result_t outputs[N_SCHEMES][ITERATIONS];
static volatile result_t sink;

static void make_inputs(void)
{{
  uint64_t s = INPUT_SEED;
  int i;

  for (i = 0; i < ITERATIONS; i++) {{
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    inputs[i] = (word_t)s;
  }}
}}

int main(void)
{{
  int s, r, i;
  int ok = 1;

  make_inputs();
  for (s = 0; s < N_SCHEMES; s++) {{
    uint64_t best = UINT64_MAX;
    for (r = 0; r < REPETITIONS; r++) {{
      uint64_t start, stop;
      start = read_counter();
      for (i = 0; i < ITERATIONS; i++)
        outputs[s][i] = (result_t)schemes[s].fn(inputs[i]);
      stop = read_counter();
      if (stop - start < best)
        best = stop - start;
    }}
    for (i = 0; i < ITERATIONS; i++)
      sink ^= outputs[s][i];
    printf("%s,%llu\\n", schemes[s].name, (unsigned long long)best);
  }}
  for (s = 1; s < N_SCHEMES; s++)
    for (i = 0; i < ITERATIONS; i++)
      if (outputs[s][i] != outputs[0][i])
        ok = 0;
#if defined(BENCH_DUMP_OUTPUTS)
  for (i = 0; i < ITERATIONS; i++)
    printf("out,%d,%llu\\n", i, (unsigned long long)outputs[0][i]);
#endif
  puts(ok ? "OK" : "MISMATCH");
  return ok ? 0 : 1;
}}
"""

_MASK64 = (1 << 64) - 1


def _input_seed(seed: int) -> int:
    s = (0x9E3779B97F4A7C15 ^ seed) & _MASK64
    return s or 1


def bench_inputs(iterations: int, width: int, seed: int = 0) -> List[int]:
    """The xorshift64 inputs the harness generates, reduced to ``width`` bits."""
    s = _input_seed(seed)
    out = []
    for _ in range(iterations):
        s ^= (s << 13) & _MASK64
        s ^= s >> 7
        s ^= (s << 17) & _MASK64
        out.append(s & ((1 << width) - 1))
    return out


def bench_coefficients(degree: int, width: int, seed: int = 0) -> Dict[str, int]:
    rng = random.Random(seed)
    return {f"A{i}": rng.getrandbits(width) for i in range(degree + 1)}


def bench_polynomial(degree: int) -> Polynomial:
    return Polynomial("x", tuple(CoefficientAtom(f"A{i}") for i in range(degree + 1)))


def _check_bench_args(degree, schemes, iterations, width):
    if degree < 0 or degree > MAX_BENCH_DEGREE:
        raise UnsupportedDegree(f"benchmark degree must be within 0..{MAX_BENCH_DEGREE}")
    if not schemes:
        raise EmptySchemeList("no schemes selected for the benchmark")
    unknown = [s for s in schemes if s not in SCHEMES]
    if unknown:
        raise InputError(f"unknown scheme(s): {', '.join(unknown)}")
    if iterations < 1:
        raise InputError("iterations must be at least 1")
    if width not in (8, 16, 32, 64):
        raise InputError("width must be 8, 16, 32 or 64")


def emit_benchmark(
    degree: int,
    schemes: Sequence[str] = tuple(SCHEMES),
    iterations: int = 128,
    width: int = 32,
    repetitions: int = 16,
    seed: int = 0,
) -> str:
    schemes = list(schemes)
    _check_bench_args(degree, schemes, iterations, width)
    word_t = "uint64_t" if width == 64 else "uint32_t"
    result_t = f"uint{width}_t"
    suffix = "ull" if width == 64 else "u"
    coeffs = bench_coefficients(degree, width, seed)
    coeff_lines = "\n".join(f"#define {k} ((word_t){v}{suffix})" for k, v in coeffs.items())
    poly = bench_polynomial(degree)
    funcs = []
    for name in schemes:
        sig = Signature("word_t", f"poly_{name}", (("word_t", "x"),))
        unit = emit_function(build(poly, name), sig)
        funcs.append(f"static NOINLINE {unit.text}")
    table = ",\n".join(f'  {{"{name}", poly_{name}}}' for name in schemes)
    return _BENCH_TEMPLATE.format(
        degree=degree,
        width=width,
        iterations=iterations,
        repetitions=repetitions,
        n_schemes=len(schemes),
        input_seed=_input_seed(seed),
        word_t=word_t,
        result_t=result_t,
        coefficients=coeff_lines,
        functions="\n".join(funcs),
        table=table,
    )


@dataclass
class SimulatedRun:
    outputs: Dict[str, List[int]] = field(default_factory=dict)
    status: str = "OK"


def simulate_benchmark(
    degree: int,
    schemes: Sequence[str] = tuple(SCHEMES),
    iterations: int = 128,
    width: int = 32,
    seed: int = 0,
    plans: Optional[Dict[str, EvalDag]] = None,
) -> SimulatedRun:
    """Replay the harness's self-check with the wrapping-integer oracle.

    ``plans`` overrides the generated plan for a scheme (used to exercise the
    MISMATCH path).
    """
    from .oracle import Binding, eval_dag

    schemes = list(schemes)
    _check_bench_args(degree, schemes, iterations, width)
    poly = bench_polynomial(degree)
    coeffs = bench_coefficients(degree, width, seed)
    xs = bench_inputs(iterations, width, seed)
    run = SimulatedRun()
    for name in schemes:
        dag = (plans or {}).get(name) or build(poly, name)
        run.outputs[name] = [eval_dag(dag, Binding(x, coeffs, width)) for x in xs]
    first = run.outputs[schemes[0]]
    if any(run.outputs[s] != first for s in schemes[1:]):
        run.status = "MISMATCH"
    return run


__all__ = [
    "EmittedUnit",
    "Signature",
    "c_expression",
    "count_text_ops",
    "emit_benchmark",
    "emit_function",
    "simulate_benchmark",
    "transform_source",
]
