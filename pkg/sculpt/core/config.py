"""Library defaults and the experiment configuration file format.

Experiment files are INI-style text with four sections. Lists are
comma-separated; angles are given as fractions of pi/2, the way the
schedules in the literature are quoted (``0.56`` means ``0.56*pi/2``).

.. code-block:: ini

    [sculpt]
    version = 1
    seed = 2024
    out_dir = results
    jobs = 4

    [limits]
    exhaustive = 30
    rejection_cap = 1000000
    max_qubits = 26
    hifid_cap = 100000

    [solve]
    strategy = hybrid
    theta_frac = 0.56
    hold = 37
    ramp = 38

    [sweep]
    experiments = hifid, cost
    n = 8, 10
    theta_frac = 0.5
    schedules = linear:40, sqrt:40, stepped:0.56:20:20
    instances = 5
    target_ns = 1
"""

import configparser
import hashlib
import logging
import re

from sculpt.core.exception import ConfigError

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1

# Library-wide defaults
EXHAUSTIVE_LIMIT = 30
REJECTION_CAP = 10**6
MAX_QUBITS = 26
PASS_FLOOR = 1e-300
HIFID_CAP = 10**5
HIFID_THRESHOLD = 0.999
CONDITION_LIMIT = 1e12
AMBIGUITY_Z = 3.0
CLAUSE_RATIO = 4.267

STRATEGIES = ("adiabatic-linear", "adiabatic-sqrt", "sculpt", "hybrid")
EXPERIMENTS = ("trace", "cost", "hifid", "prefactor", "compare", "noise")
NOISE_MODES = ("multiplicative", "additive")


def _int_list(text):
    return [int(v) for v in _split(text)]


def _float_list(text):
    return [float(v) for v in _split(text)]


def _str_list(text):
    return _split(text)


def _split(text):
    return [v.strip() for v in text.split(",") if v.strip()]


def _bool(text):
    lowered = text.strip().lower()
    if lowered in ("1", "yes", "true", "on"):
        return True
    if lowered in ("0", "no", "false", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _optional_int(text):
    text = text.strip()
    if text.lower() in ("", "none"):
        return None
    return int(text)


# section -> key -> (parser, default)
SCHEMA = {
    "sculpt": {
        "version": (int, FORMAT_VERSION),
        "seed": (int, 0),
        "out_dir": (str, "results"),
        "jobs": (int, 1),
    },
    "limits": {
        "exhaustive": (int, EXHAUSTIVE_LIMIT),
        "rejection_cap": (int, REJECTION_CAP),
        "max_qubits": (int, MAX_QUBITS),
        "hifid_cap": (int, HIFID_CAP),
    },
    "solve": {
        "strategy": (str, "sculpt"),
        "theta_frac": (float, 0.5),
        "cycles": (int, 40),
        "hold": (_optional_int, None),
        "ramp": (_optional_int, None),
        "n_full": (_optional_int, None),
        "runs_max": (int, 101),
        "try_cap": (int, 10**6),
        "noise": (float, 0.0),
        "noise_mode": (str, "multiplicative"),
        "reduce": (_bool, False),
        "shuffle_each_try": (_bool, False),
    },
    "sweep": {
        "experiments": (_str_list, ["hifid"]),
        "n": (_int_list, [8]),
        "theta_frac": (_float_list, [0.5]),
        "schedules": (_str_list, ["linear:40"]),
        "instances": (int, 4),
        "target_ns": (_optional_int, 1),
        "noise": (_float_list, [0.0]),
        "noise_mode": (str, "multiplicative"),
        "trials": (int, 200),
        "threshold": (float, HIFID_THRESHOLD),
    },
}

_LIST_PARSERS = (_int_list, _float_list, _str_list)


class ExperimentConfig:
    """Resolved experiment configuration

    Every value of :data:`SCHEMA` is present after construction; values not
    supplied by a file keep their defaults.

    Attributes
    ----------
    path : str or None
        The file the configuration was read from, if any.
    """

    def __init__(self, values=None, path=None) -> None:
        self.path = path
        self._values = {
            section: {key: default for key, (_, default) in keys.items()}
            for section, keys in SCHEMA.items()
        }
        if values is not None:
            for section, keys in values.items():
                for key, value in keys.items():
                    self.set(section, key, value)
        self.validate()

    def __repr__(self):
        return f"ExperimentConfig(seed={self.seed}, path={self.path!r})"

    def get(self, section, key):
        return self._values[section][key]

    def set(self, section, key, value):
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown option [{section}] {key}", self.path)
        self._values[section][key] = value

    def section(self, section):
        return dict(self._values[section])

    @property
    def seed(self):
        return self._values["sculpt"]["seed"]

    @property
    def jobs(self):
        return self._values["sculpt"]["jobs"]

    @property
    def out_dir(self):
        return self._values["sculpt"]["out_dir"]

    def validate(self, lines=None):
        """Check value ranges, reporting the offending line where known."""
        lines = lines or {}

        def fail(section, key, message):
            raise ConfigError(
                f"[{section}] {key}: {message}", self.path, lines.get((section, key))
            )

        if self.get("sculpt", "version") != FORMAT_VERSION:
            fail("sculpt", "version", f"unsupported format version (expected {FORMAT_VERSION})")
        if self.get("sculpt", "jobs") < 1:
            fail("sculpt", "jobs", "must be at least 1")
        for key in ("exhaustive", "rejection_cap", "max_qubits", "hifid_cap"):
            if self.get("limits", key) < 1:
                fail("limits", key, "must be positive")
        if self.get("solve", "strategy") not in STRATEGIES:
            fail("solve", "strategy", f"must be one of {', '.join(STRATEGIES)}")
        for section in ("solve", "sweep"):
            if self.get(section, "noise_mode") not in NOISE_MODES:
                fail(section, "noise_mode", f"must be one of {', '.join(NOISE_MODES)}")
        noise = self.get("solve", "noise")
        if noise < 0:
            fail("solve", "noise", "must be non-negative")
        if any(v < 0 for v in self.get("sweep", "noise")):
            fail("sweep", "noise", "must be non-negative")
        unknown = [e for e in self.get("sweep", "experiments") if e not in EXPERIMENTS]
        if unknown:
            fail("sweep", "experiments", f"unknown experiment(s) {', '.join(unknown)}")
        for frac in self.get("sweep", "theta_frac") + [self.get("solve", "theta_frac")]:
            if not 0.0 < frac <= 1.0:
                fail("sweep", "theta_frac", "fractions of pi/2 must lie in (0, 1]")
        if any(n < 1 for n in self.get("sweep", "n")):
            fail("sweep", "n", "variable counts must be positive")

    @classmethod
    def from_string(cls, text, path=None):
        """Parse configuration text

        Parameters
        ----------
        text : str
            The INI-style configuration text.
        path : str, optional
            Used in error messages only.

        Raises
        ------
        ConfigError
            On syntax errors, unknown keys, or invalid values.
        """
        parser = configparser.ConfigParser(
            inline_comment_prefixes=("#", ";"), interpolation=None
        )
        try:
            parser.read_string(text, source=path or "<config>")
        except configparser.Error as e:
            line = getattr(e, "lineno", None)
            if line is None and getattr(e, "errors", None):
                line = e.errors[0][0]
            raise ConfigError(f"syntax error ({type(e).__name__})", path, line) from e

        lines = _locate_keys(text)
        config = cls(path=path)
        for section in parser.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", path, lines.get((section, None)))
            for key, raw in parser.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(
                        f"unknown option [{section}] {key}", path, lines.get((section, key))
                    )
                convert, _ = SCHEMA[section][key]
                try:
                    config._values[section][key] = convert(raw)
                except ValueError as e:
                    raise ConfigError(
                        f"[{section}] {key}: {e}", path, lines.get((section, key))
                    ) from e
        config.validate(lines)
        logger.debug(f"Loaded configuration from {path or '<string>'}")
        return config

    @classmethod
    def from_file(cls, path):
        try:
            with open(path, "r") as infile:
                text = infile.read()
        except OSError as e:
            raise ConfigError(f"cannot read configuration ({e.strerror})", path) from e
        return cls.from_string(text, path=str(path))

    def to_text(self):
        """Return the resolved configuration in normal form."""
        out = []
        for section, keys in SCHEMA.items():
            out.append(f"[{section}]")
            for key, (convert, _) in keys.items():
                value = self._values[section][key]
                if convert in _LIST_PARSERS:
                    text = ", ".join(str(v) for v in value)
                elif value is None:
                    text = "none"
                elif isinstance(value, bool):
                    text = "true" if value else "false"
                else:
                    text = str(value)
                out.append(f"{key} = {text}")
            out.append("")
        return "\n".join(out)

    def digest(self):
        """SHA-256 of the resolved normal form."""
        return hashlib.sha256(self.to_text().encode("utf-8")).hexdigest()


_SECTION_RE = re.compile(r"^\s*\[([^\]]+)\]")
_KEY_RE = re.compile(r"^\s*([A-Za-z_][\w\-]*)\s*[=:]")


def _locate_keys(text):
    """Map ``(section, key)`` to 1-based line numbers."""
    lines = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1).strip()
            lines[(section, None)] = number
            continue
        m = _KEY_RE.match(line)
        if m and section is not None:
            lines[(section, m.group(1).lower())] = number
    return lines
