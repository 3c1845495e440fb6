"""Line-oriented sequence description language.

A sequence file is one statement per line::

    # strontium, 532 nm lattice
    atom mass=1.4597e-25 kg transition=2.6969e15 rad/s temperature=4e-7 K
    lattice wavelength=532 nm
    launch v0=0.081035 m/s
    bragg_pair T=5 ms dv=0.017065 m/s
    clock_pulse freq=2.6969e15 rad/s
    lattice_hold T_B=0.87 s T_prime=5 ms
    clock_pulse   # clock pulses bracket the hold
    bragg_pair    # the closing pair ends the sequence

Each `key=value` may be followed by a unit token.  In SI mode units are
required on dimensioned fields; `mode reduced` switches to self-consistent
units (bare numbers) and allows a `constants` statement that sets a finite
c (plus optionally g, hbar, k_B).  Parsing is total: any input yields a
ParseResult whose diagnostics carry line/column positions, never an
exception.  `canonical_text` serializes a spec back to a normal form that
re-parses to the identical spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .model import (
    G_STANDARD,
    MODE_REDUCED,
    MODE_SI,
    AtomSpecies,
    ExperimentSpec,
    LatticeConfig,
    PhysicalConstants,
    TimingConfig,
    derive_kinematics,
)

KEYWORDS = {
    "constants",
    "atom",
    "lattice",
    "launch",
    "bragg_pair",
    "clock_pulse",
    "lattice_hold",
    "mode",
}

TIMELINE_ORDER = ["launch", "bragg_pair", "clock_pulse", "lattice_hold",
                  "clock_pulse", "bragg_pair"]

# unit token -> (dimension, factor to SI).  Hz is accepted on angular
# frequency fields and converted with the explicit 2*pi.
UNIT_TABLE = {
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "us": ("time", 1e-6),
    "m": ("length", 1.0),
    "mm": ("length", 1e-3),
    "um": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "m/s": ("velocity", 1.0),
    "mm/s": ("velocity", 1e-3),
    "m/s2": ("acceleration", 1.0),
    "rad/s": ("angular_frequency", 1.0),
    "Hz": ("angular_frequency", 2.0 * math.pi),
    "K": ("temperature", 1.0),
    "J": ("energy", 1.0),
    "kg": ("mass", 1.0),
    "1/m": ("wavenumber", 1.0),
}

# (keyword, key) -> dimension
FIELD_DIMENSIONS = {
    ("atom", "mass"): "mass",
    ("atom", "transition"): "angular_frequency",
    ("atom", "temperature"): "temperature",
    ("lattice", "wavelength"): "length",
    ("lattice", "wavevector"): "wavenumber",
    ("lattice", "depth"): "energy",
    ("launch", "v0"): "velocity",
    ("bragg_pair", "T"): "time",
    ("bragg_pair", "dv"): "velocity",
    ("clock_pulse", "freq"): "angular_frequency",
    ("lattice_hold", "T_B"): "time",
    ("lattice_hold", "T_prime"): "time",
    ("constants", "c"): "velocity",
    ("constants", "g"): "acceleration",
    ("constants", "hbar"): None,
    ("constants", "k_B"): None,
}

_MATCH_RTOL = 1e-12  # repeated values on paired statements must agree to this


def _example_unit(dim: str) -> str:
    """Canonical unit token for a dimension, used in diagnostics."""
    for unit, (unit_dim, factor) in UNIT_TABLE.items():
        if unit_dim == dim and factor == 1.0:
            return unit
    return "?"


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    message: str
    line: int  # 1-based
    column: int  # 1-based

    def __str__(self) -> str:
        return f"{self.line}:{self.column}: {self.severity}: {self.message}"


@dataclass(frozen=True)
class Pair:
    key: str
    raw: str
    unit: str | None
    column: int


@dataclass(frozen=True)
class Statement:
    keyword: str
    pairs: tuple[Pair, ...]
    line: int
    column: int


@dataclass
class ParseResult:
    statements: list[Statement] = field(default_factory=list)
    diagnostics: list[Diagnostic] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(d.severity == "error" for d in self.diagnostics)


class SpecError(ValueError):
    """Raised by the strict loaders when a sequence does not validate."""

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        super().__init__("; ".join(str(d) for d in diagnostics
                                   if d.severity == "error"))


def _tokenize(line: str) -> list[tuple[str, int]]:
    """(token, 1-based column) pairs, comments stripped."""
    hash_pos = line.find("#")
    if hash_pos >= 0:
        line = line[:hash_pos]
    tokens = []
    pos = 0
    for raw in line.split(" "):
        stripped = raw.strip()
        if stripped:
            tokens.append((stripped, pos + 1))
        pos += len(raw) + 1
    return tokens


def parse_sequence(text: str) -> ParseResult:
    """Parse sequence text.  Total: always returns, collecting diagnostics."""
    result = ParseResult()
    for lineno, line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize(line.replace("\t", " "))
        if not tokens:
            continue
        keyword, kw_col = tokens[0]
        if keyword not in KEYWORDS:
            result.diagnostics.append(Diagnostic(
                "error", f"unknown statement '{keyword}'", lineno, kw_col))
            continue
        pairs: list[Pair] = []
        for tok, col in tokens[1:]:
            if "=" in tok:
                key, _, raw = tok.partition("=")
                if not key or not raw:
                    result.diagnostics.append(Diagnostic(
                        "error", f"malformed field '{tok}'", lineno, col))
                    continue
                pairs.append(Pair(key=key, raw=raw, unit=None, column=col))
            elif keyword == "mode" and not pairs:
                # bare word argument: "mode reduced"
                pairs.append(Pair(key="mode", raw=tok, unit=None, column=col))
            elif pairs and pairs[-1].unit is None:
                pairs[-1] = Pair(key=pairs[-1].key, raw=pairs[-1].raw,
                                 unit=tok, column=pairs[-1].column)
            else:
                result.diagnostics.append(Diagnostic(
                    "error", f"stray token '{tok}' (expected key=value)",
                    lineno, col))
        result.statements.append(Statement(
            keyword=keyword, pairs=tuple(pairs), line=lineno, column=kw_col))
    return result


class _Validator:
    def __init__(self, parsed: ParseResult):
        self.parsed = parsed
        self.diagnostics = list(parsed.diagnostics)
        self.mode = MODE_SI

    def error(self, message: str, line: int, column: int = 1) -> None:
        self.diagnostics.append(Diagnostic("error", message, line, column))

    def warn(self, message: str, line: int, column: int = 1) -> None:
        self.diagnostics.append(Diagnostic("warning", message, line, column))

    def _by_keyword(self, keyword: str) -> list[Statement]:
        return [s for s in self.parsed.statements if s.keyword == keyword]

    def _fields(self, stmt: Statement) -> dict[str, Pair] | None:
        out: dict[str, Pair] = {}
        ok = True
        for pair in stmt.pairs:
            if pair.key in out:
                self.error(f"duplicate field '{pair.key}'", stmt.line,
                           pair.column)
                ok = False
            out[pair.key] = pair
        return out if ok else None

    def _value(self, stmt: Statement, pair: Pair) -> float | None:
        """Numeric value of a pair in SI units, unit-checked per mode."""
        try:
            value = float(pair.raw)
        except ValueError:
            self.error(f"'{pair.key}' is not a number: '{pair.raw}'",
                       stmt.line, pair.column)
            return None
        dim = FIELD_DIMENSIONS.get((stmt.keyword, pair.key))
        if pair.unit is not None:
            entry = UNIT_TABLE.get(pair.unit)
            if entry is None:
                self.error(f"unknown unit '{pair.unit}'", stmt.line,
                           pair.column)
                return None
            unit_dim, factor = entry
            if dim is not None and unit_dim != dim:
                self.error(
                    f"'{pair.key}' expects a {dim} unit, got '{pair.unit}'",
                    stmt.line, pair.column)
                return None
            return value * factor
        if self.mode == MODE_SI and dim is not None:
            self.error(f"'{pair.key}' needs a unit in SI mode (e.g. "
                       f"{_example_unit(dim)})", stmt.line, pair.column)
            return None
        return value

    def _field_value(self, stmt: Statement, fields: dict[str, Pair],
                     key: str, *, required: bool = False,
                     positive: bool = False,
                     nonnegative: bool = False) -> float | None:
        pair = fields.pop(key, None)
        if pair is None:
            if required:
                self.error(f"'{stmt.keyword}' requires '{key}='", stmt.line,
                           stmt.column)
            return None
        value = self._value(stmt, pair)
        if value is None:
            return None
        if positive and value <= 0:
            self.error(f"'{key}' must be positive", stmt.line, pair.column)
            return None
        if nonnegative and value < 0:
            self.error(f"'{key}' must not be negative", stmt.line,
                       pair.column)
            return None
        return value

    def _leftover(self, stmt: Statement, fields: dict[str, Pair]) -> None:
        for pair in fields.values():
            self.error(f"unknown field '{pair.key}' on '{stmt.keyword}'",
                       stmt.line, pair.column)

    def _single(self, keyword: str, *, required: bool = True
                ) -> Statement | None:
        stmts = self._by_keyword(keyword)
        if not stmts:
            if required:
                self.error(f"missing '{keyword}' statement", 0)
            return None
        if len(stmts) > 1:
            self.error(f"'{keyword}' may appear only once", stmts[1].line,
                       stmts[1].column)
        return stmts[0]

    def _match_pairs(self, first: Statement, second: Statement,
                     expected: dict[str, float | None]) -> None:
        """The closing statement of a pair may repeat fields; they must agree."""
        fields = self._fields(second)
        if fields is None:
            return
        for key, first_value in expected.items():
            pair = fields.pop(key, None)
            if pair is None:
                continue
            value = self._value(second, pair)
            if value is not None and first_value is not None:
                if not math.isclose(value, first_value,
                                    rel_tol=_MATCH_RTOL, abs_tol=0.0):
                    self.error(
                        f"'{key}' disagrees with line {first.line} "
                        f"({value!r} vs {first_value!r})",
                        second.line, pair.column)
        self._leftover(second, fields)

    def run(self) -> ExperimentSpec | None:
        # mode first: it changes unit requirements everywhere else
        mode_stmt = self._single("mode", required=False)
        if mode_stmt is not None:
            fields = self._fields(mode_stmt) or {}
            pair = fields.get("mode")
            if (pair is None or pair.unit is not None
                    or pair.raw not in (MODE_SI, MODE_REDUCED)):
                self.error("mode must be 'si' or 'reduced'", mode_stmt.line,
                           mode_stmt.column)
            else:
                self.mode = pair.raw

        constants = self._constants()
        atom = self._atom()
        lattice = self._lattice(constants)
        timing_parts = self._timing(constants)
        order_ok = self._check_order()

        if (constants is None or atom is None or lattice is None
                or timing_parts is None or not order_ok):
            return None
        timing, omega = timing_parts
        spec = ExperimentSpec(constants=constants, atom=atom, lattice=lattice,
                              timing=timing, omega=omega, mode=self.mode)
        if not self._check_derived(spec):
            return None
        return spec

    def _constants(self) -> PhysicalConstants | None:
        stmt = self._single("constants", required=False)
        if stmt is None:
            if self.mode == MODE_REDUCED:
                self.error("reduced mode requires 'constants c=...'", 0)
                return None
            return PhysicalConstants()
        fields = self._fields(stmt)
        if fields is None:
            return None
        if self.mode == MODE_SI:
            for key in ("c", "hbar", "k_B"):
                if key in fields:
                    self.error(f"'{key}' is not overridable in SI mode",
                               stmt.line, fields[key].column)
                    return None
            g = self._field_value(stmt, fields, "g", positive=True)
            self._leftover(stmt, fields)
            return PhysicalConstants(g=g) if g is not None \
                else PhysicalConstants()
        c = self._field_value(stmt, fields, "c", required=True, positive=True)
        g = self._field_value(stmt, fields, "g", positive=True)
        hbar = self._field_value(stmt, fields, "hbar", positive=True)
        k_b = self._field_value(stmt, fields, "k_B", positive=True)
        self._leftover(stmt, fields)
        if c is None:
            return None
        return PhysicalConstants.reduced(
            c=c,
            g=g if g is not None else 9.81,
            hbar=hbar if hbar is not None else 1.0,
            k_B=k_b if k_b is not None else 1.0,
        )

    def _atom(self) -> AtomSpecies | None:
        stmt = self._single("atom")
        if stmt is None:
            return None
        fields = self._fields(stmt)
        if fields is None:
            return None
        mass = self._field_value(stmt, fields, "mass", required=True,
                                 positive=True)
        omega0 = self._field_value(stmt, fields, "transition", required=True,
                                   nonnegative=True)
        temperature = self._field_value(stmt, fields, "temperature",
                                        positive=True)
        self._leftover(stmt, fields)
        if mass is None or omega0 is None:
            return None
        return AtomSpecies(mass=mass, omega0=omega0, temperature=temperature)

    def _lattice(self, constants: PhysicalConstants | None
                 ) -> LatticeConfig | None:
        stmt = self._single("lattice")
        if stmt is None:
            return None
        fields = self._fields(stmt)
        if fields is None:
            return None
        wavelength = self._field_value(stmt, fields, "wavelength",
                                       positive=True)
        wavevector = self._field_value(stmt, fields, "wavevector",
                                       positive=True)
        depth = self._field_value(stmt, fields, "depth", positive=True)
        self._leftover(stmt, fields)
        if (wavelength is None) == (wavevector is None):
            self.error("'lattice' needs exactly one of wavelength= or "
                       "wavevector=", stmt.line, stmt.column)
            return None
        if wavevector is None:
            wavevector = 2.0 * math.pi / wavelength
        return LatticeConfig(wavevector=wavevector, depth=depth)

    def _timing(self, constants: PhysicalConstants | None
                ) -> tuple[TimingConfig, float] | None:
        launch = self._single("launch")
        braggs = self._by_keyword("bragg_pair")
        clocks = self._by_keyword("clock_pulse")
        hold = self._single("lattice_hold")
        ok = launch is not None and hold is not None
        for name, stmts in (("bragg_pair", braggs), ("clock_pulse", clocks)):
            if len(stmts) != 2:
                line = stmts[2].line if len(stmts) > 2 else 0
                self.error(f"expected exactly two '{name}' statements, "
                           f"found {len(stmts)}", line)
                ok = False
        if not ok:
            return None

        fields = self._fields(launch)
        v0 = None
        if fields is not None:
            v0 = self._field_value(launch, fields, "v0", required=True)
            self._leftover(launch, fields)

        fields = self._fields(braggs[0])
        t_sep = delta_v = None
        if fields is not None:
            t_sep = self._field_value(braggs[0], fields, "T", required=True,
                                      positive=True)
            delta_v = self._field_value(braggs[0], fields, "dv",
                                        required=True, positive=True)
            self._leftover(braggs[0], fields)
        self._match_pairs(braggs[0], braggs[1], {"T": t_sep, "dv": delta_v})

        fields = self._fields(clocks[0])
        omega = None
        if fields is not None:
            omega = self._field_value(clocks[0], fields, "freq",
                                      required=True, nonnegative=True)
            self._leftover(clocks[0], fields)
        self._match_pairs(clocks[0], clocks[1], {"freq": omega})

        fields = self._fields(hold)
        t_hold = t_prime = None
        if fields is not None:
            t_hold = self._field_value(hold, fields, "T_B", required=True,
                                       positive=True)
            t_prime = self._field_value(hold, fields, "T_prime",
                                        positive=True)
            self._leftover(hold, fields)

        if None in (v0, t_sep, delta_v, omega, t_hold):
            return None

        g = constants.g if constants is not None else 9.81
        derived_t_prime = (v0 + delta_v) / g - t_sep
        if t_prime is None:
            t_prime = derived_t_prime
            if t_prime <= 0:
                self.error(
                    "launch too slow: the arms fall back before the hold "
                    f"(apex-derived T_prime = {t_prime!r} s)", hold.line,
                    hold.column)
                return None
        elif not math.isclose(t_prime, derived_t_prime, rel_tol=_MATCH_RTOL,
                              abs_tol=0.0):
            self.error(
                "T_prime breaks the apex condition v0 + dv = g*(T + T_prime) "
                f"(given {t_prime!r} s, apex requires {derived_t_prime!r} s)",
                hold.line, hold.column)
            return None
        timing = TimingConfig(v0=v0, delta_v=delta_v, T=t_sep,
                              T_prime=t_prime, T_B=t_hold)
        return timing, omega

    def _check_order(self) -> bool:
        timeline = [s for s in self.parsed.statements
                    if s.keyword in ("launch", "bragg_pair", "clock_pulse",
                                     "lattice_hold")]
        keywords = [s.keyword for s in timeline]
        if keywords == TIMELINE_ORDER:
            return True
        if sorted(keywords) == sorted(TIMELINE_ORDER):
            # right multiset, wrong order: point at the first misplacement
            for stmt, expected in zip(timeline, TIMELINE_ORDER):
                if stmt.keyword != expected:
                    self.error(
                        f"'{stmt.keyword}' out of order: expected "
                        f"'{expected}' here (clock pulses must bracket the "
                        "hold, Bragg pairs the clock pulses)", stmt.line,
                        stmt.column)
                    return False
        # wrong counts already reported by _timing
        return False

    def _check_derived(self, spec: ExperimentSpec) -> bool:
        kin = derive_kinematics(spec)
        holds = self._by_keyword("lattice_hold")
        line = holds[0].line if holds else 0
        if kin.n_oscillations < 1:
            self.error(
                f"hold T_B = {spec.timing.T_B!r} s is shorter than half a "
                f"reversal period (tau_B = {kin.tau_b!r} s): the arms never "
                "meet the lattice", line)
            return False
        return True


def validate(source: str | ParseResult) -> tuple[ExperimentSpec | None,
                                                 list[Diagnostic]]:
    """Validate sequence text (or a ParseResult) into an ExperimentSpec.

    Returns (spec, diagnostics); spec is None when any diagnostic is an
    error.  Never raises.
    """
    parsed = parse_sequence(source) if isinstance(source, str) else source
    validator = _Validator(parsed)
    spec = validator.run()
    if any(d.severity == "error" for d in validator.diagnostics):
        spec = None
    return spec, validator.diagnostics


def loads(text: str) -> ExperimentSpec:
    """Strict loader: validated spec or SpecError."""
    spec, diagnostics = validate(text)
    if spec is None:
        raise SpecError(diagnostics)
    return spec


def load_spec(path) -> ExperimentSpec:
    with open(path, "r", encoding="utf-8") as handle:
        return loads(handle.read())


def _fmt(value: float, unit: str | None) -> str:
    return repr(float(value)) if unit is None else f"{value!r} {unit}"


def canonical_text(spec: ExperimentSpec) -> str:
    """Serialize to the canonical statement order and spelling.

    parse/validate of the output reproduces the spec exactly (float repr
    round-trips), which the file formats rely on for reproducibility.
    """
    si = spec.mode == MODE_SI
    const = spec.constants

    def unit(name: str) -> str | None:
        return name if si else None

    lines = []
    if not si:
        lines.append("mode reduced")
        lines.append(f"constants c={const.c!r} g={const.g!r} "
                     f"hbar={const.hbar!r} k_B={const.k_B!r}")
    elif const.g != G_STANDARD:
        lines.append(f"constants g={const.g!r} m/s2")
    atom = f"atom mass={_fmt(spec.atom.mass, unit('kg'))} " \
           f"transition={_fmt(spec.atom.omega0, unit('rad/s'))}"
    if spec.atom.temperature is not None:
        atom += f" temperature={_fmt(spec.atom.temperature, unit('K'))}"
    lines.append(atom)
    lattice = f"lattice wavevector={_fmt(spec.lattice.wavevector, unit('1/m'))}"
    if spec.lattice.depth is not None:
        lattice += f" depth={_fmt(spec.lattice.depth, unit('J'))}"
    lines.append(lattice)
    timing = spec.timing
    lines.append(f"launch v0={_fmt(timing.v0, unit('m/s'))}")
    lines.append(f"bragg_pair T={_fmt(timing.T, unit('s'))} "
                 f"dv={_fmt(timing.delta_v, unit('m/s'))}")
    lines.append(f"clock_pulse freq={_fmt(spec.omega, unit('rad/s'))}")
    lines.append(f"lattice_hold T_B={_fmt(timing.T_B, unit('s'))} "
                 f"T_prime={_fmt(timing.T_prime, unit('s'))}")
    lines.append("clock_pulse")
    lines.append("bragg_pair")
    return "\n".join(lines) + "\n"
