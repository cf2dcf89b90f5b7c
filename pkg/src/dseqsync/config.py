"""Scenario configuration: dataclasses with defaults plus INI-file loading.

The config file is plain key/value text with one section per concern
([sim], [channel], [design], [sweep], [multiuser], [optimize]); every field
has a default, so an empty file is a valid configuration.
"""

import configparser
import math
from dataclasses import dataclass, field, replace

__all__ = ["ChannelConfig", "DesignConfig", "SimConfig", "load_config"]


@dataclass(frozen=True)
class ChannelConfig:
    """Link model selection: awgn | singlepath | rician | tdl."""

    kind: str = "singlepath"
    k_factor_db: float = 13.2
    n_nlos: int = 5
    tdl_profile: str = ""  # CSV path with header delay_samples,power_db
    cp_len: int = 0  # 0 means n // 8 at run time

    def __post_init__(self):
        if self.kind not in ("awgn", "singlepath", "rician", "tdl"):
            raise ValueError(f"unknown channel kind {self.kind!r}")


@dataclass(frozen=True)
class DesignConfig:
    """Double-sequence design parameters, fixed or optimizer-derived.

    theta/eta are in radians per sample. eta = None picks -2*pi/n, which
    centers the sum-difference branch on zero CFO.
    """

    mode: str = "fixed"  # fixed | auto
    theta: float = 0.0
    k_prime: int = 1
    eta: float | None = None

    def __post_init__(self):
        if self.mode not in ("fixed", "auto"):
            raise ValueError(f"design mode must be fixed or auto, got {self.mode!r}")

    def eta_for(self, n: int) -> float:
        return -2.0 * math.pi / n if self.eta is None else self.eta


@dataclass(frozen=True)
class SimConfig:
    """One simulation scenario. CFO values are in subcarrier units (epsilon)."""

    n: int = 64
    n_tot: int = 16
    m_tot: int = 8
    methods: tuple = ("aux",)  # any of zc | aux | sumdiff
    bits: tuple = (2,)  # per-point ADC depths; math.inf for ideal
    snr_db: tuple = (10.0,)
    cfo: object = 0.0  # scalar, or (lo, hi) interval for uniform draws
    trials: int = 2000
    master_seed: int = 1234
    n_ue: int = 1
    n_zc: tuple = (63,)
    zc_root: int = 25
    channel: ChannelConfig = field(default_factory=ChannelConfig)
    design: DesignConfig = field(default_factory=DesignConfig)
    # sweep / ratio-curve knobs
    sweep_variable: str = "snr_db"  # snr_db | cfo | bits
    curve_points: int = 41
    # multiuser scenario knobs
    mu_ranges: tuple = (0.02, 0.03, 0.05, 0.07, 0.1)
    fixed_k_primes: tuple = (1, 3, 8)
    # optimizer knobs
    codebook_size: int = 101
    codebook_lo: float = -1.0
    codebook_hi: float = 1.0
    stats_csv: str = ""

    def cfo_interval(self) -> tuple[float, float] | None:
        if isinstance(self.cfo, tuple):
            return self.cfo
        return None


def _parse_bits(text: str):
    out = []
    for tok in text.replace(",", " ").split():
        tok = tok.strip().lower()
        out.append(math.inf if tok in ("inf", "infinite", "oo") else int(tok))
    return tuple(out)


def _parse_floats(text: str) -> tuple:
    return tuple(float(t) for t in text.replace(",", " ").split())


def _parse_ints(text: str) -> tuple:
    return tuple(int(t) for t in text.replace(",", " ").split())


def _parse_cfo(text: str):
    if ".." in text:
        lo, hi = (float(t) for t in text.split(".."))
        return (lo, hi)
    return float(text)


def load_config(path: str | None = None, text: str | None = None) -> SimConfig:
    """Build a SimConfig from an INI file (path) or inline text."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    if text is not None:
        parser.read_string(text)
    elif path:
        with open(path) as fh:
            parser.read_file(fh)

    cfg = SimConfig()
    if parser.has_section("sim"):
        s = parser["sim"]
        cfg = replace(
            cfg,
            n=s.getint("n", cfg.n),
            n_tot=s.getint("n_tot", cfg.n_tot),
            m_tot=s.getint("m_tot", cfg.m_tot),
            methods=tuple(s.get("methods", "aux").replace(",", " ").split()),
            bits=_parse_bits(s.get("bits", "2")),
            snr_db=_parse_floats(s.get("snr_db", "10")),
            cfo=_parse_cfo(s.get("cfo", "0.0")),
            trials=s.getint("trials", cfg.trials),
            master_seed=s.getint("master_seed", cfg.master_seed),
            n_ue=s.getint("n_ue", cfg.n_ue),
            n_zc=_parse_ints(s.get("n_zc", "63")),
            zc_root=s.getint("zc_root", cfg.zc_root),
        )
    if parser.has_section("channel"):
        c = parser["channel"]
        cfg = replace(
            cfg,
            channel=ChannelConfig(
                kind=c.get("type", "singlepath"),
                k_factor_db=c.getfloat("k_factor_db", 13.2),
                n_nlos=c.getint("n_nlos", 5),
                tdl_profile=c.get("tdl_profile", ""),
                cp_len=c.getint("cp_len", 0),
            ),
        )
    if parser.has_section("design"):
        d = parser["design"]
        eta_text = d.get("eta", "auto").strip().lower()
        cfg = replace(
            cfg,
            design=DesignConfig(
                mode=d.get("mode", "fixed"),
                theta=d.getfloat("theta", 0.0),
                k_prime=d.getint("k_prime", 1),
                eta=None if eta_text == "auto" else float(eta_text),
            ),
        )
    if parser.has_section("sweep"):
        cfg = replace(
            cfg,
            sweep_variable=parser["sweep"].get("variable", cfg.sweep_variable),
            curve_points=parser["sweep"].getint("curve_points", cfg.curve_points),
        )
    if parser.has_section("multiuser"):
        m = parser["multiuser"]
        cfg = replace(
            cfg,
            mu_ranges=_parse_floats(m.get("ranges", "0.02 0.03 0.05 0.07 0.1")),
            fixed_k_primes=_parse_ints(m.get("fixed_k_primes", "1 3 8")),
        )
    if parser.has_section("optimize"):
        o = parser["optimize"]
        cfg = replace(
            cfg,
            codebook_size=o.getint("codebook_size", cfg.codebook_size),
            codebook_lo=o.getfloat("codebook_lo", cfg.codebook_lo),
            codebook_hi=o.getfloat("codebook_hi", cfg.codebook_hi),
            stats_csv=o.get("stats_csv", ""),
        )
    return cfg
