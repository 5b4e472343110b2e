"""Experiment configuration: a flat ``key = value`` file with ``#`` comments.

Recognized keys::

    setup            preset id A..H (or give ``means``)
    means            comma-separated arm means
    matrix           path of a K x n reward CSV (fixed-matrix source)
    learners         comma-separated learner kinds
    n                horizon; defaults to round(H1) for stochastic setups
    repetitions      number of independent episodes
    master_seed      64-bit seed
    workers          process count (BAI_WORKERS overrides)
    out              CSV path; stdout when absent
    setup_e_mode     table | printed
    setup_c_gaps     exact | rounded3
    adversary        switch | two-phase | deception
    member           sto | adv (switch), adv1 | adv2 (two-phase)
    bar_k, i         arm choices of the adversarial constructions
    switch_round, pre_switch_mean, post_switch_mean, blackout_until
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..complexity import round_half_away
from ..core import BaiError, GapProfile, gaps_from_means
from ..environments import (
    bernoulli_source,
    deception_adversary,
    load_matrix_csv,
    preset,
    switch_adversary_pair,
    two_phase_adversary_pair,
)
from ..learners import SCHEDULED, learner_kind, sh_schedule, sr_phase_lengths


class ConfigError(BaiError):
    """Invalid or inconsistent experiment configuration."""


_INT_KEYS = ("n", "repetitions", "master_seed", "workers", "bar_k", "i", "switch_round", "blackout_until")
_FLOAT_KEYS = ("pre_switch_mean", "post_switch_mean")
_STR_KEYS = ("setup", "means", "matrix", "learners", "out", "setup_e_mode", "setup_c_gaps", "adversary", "member")
KNOWN_KEYS = frozenset(_INT_KEYS + _FLOAT_KEYS + _STR_KEYS)


@dataclass
class ExperimentConfig:
    setup: str | None = None
    means: tuple[float, ...] | None = None
    matrix: str | None = None
    learners: tuple[str, ...] = ("Rule", "P1", "StaticUniform")
    n: int | None = None
    repetitions: int = 1000
    master_seed: int = 0
    workers: int = 1
    out: str | None = None
    setup_e_mode: str = "table"
    setup_c_gaps: str = "exact"
    adversary: str | None = None
    member: str | None = None
    bar_k: int | None = None
    i: int | None = None
    switch_round: int | None = None
    pre_switch_mean: float | None = None
    post_switch_mean: float | None = None
    blackout_until: int | None = None
    label: str = field(default="", compare=False)


def _parse_value(key: str, raw: str):
    try:
        if key in _INT_KEYS:
            return int(raw, 0)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot parse {raw!r}") from None
    if key == "means":
        try:
            return tuple(float(x) for x in raw.split(",") if x.strip())
        except ValueError:
            raise ConfigError(f"means: cannot parse {raw!r}") from None
    if key == "learners":
        return tuple(x.strip() for x in raw.split(",") if x.strip())
    return raw


def parse_config_text(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(comment_prefixes=("#",), inline_comment_prefixes=("#",), interpolation=None)
    try:
        parser.read_string("[experiment]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    values = {}
    for key, raw in parser["experiment"].items():
        if key not in KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}")
        values[key] = _parse_value(key, raw.strip())
    cfg = ExperimentConfig(**values)
    return validate(cfg)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config_text(text)


def _base_profile(cfg: ExperimentConfig) -> GapProfile:
    if cfg.means is not None:
        return gaps_from_means(cfg.means)
    return gaps_from_means(preset(cfg.setup, setup_e_mode=cfg.setup_e_mode, setup_c_gaps=cfg.setup_c_gaps))


def default_switch_rank(profile: GapProfile) -> int:
    """The rank i >= 2 maximizing i / gap_(i), the worst case of the switch construction."""
    g = np.asarray(profile.sorted_gaps)
    r = np.arange(1, profile.K + 1)
    return int(np.argmax((r / g)[1:])) + 2


def validate(cfg: ExperimentConfig) -> ExperimentConfig:
    """Check the configuration, fill defaults and set the row label."""
    sources = [x is not None for x in (cfg.setup, cfg.means, cfg.matrix)]
    if sum(sources) != 1:
        raise ConfigError("give exactly one of setup, means or matrix")
    if cfg.setup is not None:
        cfg.setup = cfg.setup.strip().upper()
        if cfg.setup not in "ABCDEFGH" or len(cfg.setup) != 1:
            raise ConfigError(f"unknown setup {cfg.setup!r}")
    if cfg.setup_e_mode not in ("table", "printed"):
        raise ConfigError("setup_e_mode must be table or printed")
    if cfg.setup_c_gaps not in ("exact", "rounded3"):
        raise ConfigError("setup_c_gaps must be exact or rounded3")
    if cfg.repetitions < 1:
        raise ConfigError("repetitions must be at least 1")
    if not 0 <= cfg.master_seed < 2**64:
        raise ConfigError("master_seed must be a 64-bit unsigned integer")
    if not cfg.learners:
        raise ConfigError("no learners configured")
    try:
        cfg.learners = tuple(learner_kind(k) for k in cfg.learners)
    except BaiError as exc:
        raise ConfigError(str(exc)) from None

    if cfg.adversary is not None:
        if cfg.adversary not in ("switch", "two-phase", "deception"):
            raise ConfigError(f"unknown adversary {cfg.adversary!r}")
        if cfg.matrix is not None:
            raise ConfigError("adversaries are built from setup or means, not a matrix")
        if cfg.n is None:
            raise ConfigError("adversarial experiments need an explicit n")

    try:
        source, _ = build_source(cfg)
    except ConfigError:
        raise
    except BaiError as exc:
        raise ConfigError(str(exc)) from None
    K = source.K
    if cfg.n is None:
        cfg.n = source.n if cfg.matrix is not None else max(K, round_half_away(_base_profile(cfg).h1))
    if cfg.n < K:
        raise ConfigError(f"n = {cfg.n} is below the number of arms {K}")
    for kind in cfg.learners:
        if kind in SCHEDULED:
            try:
                if kind == "SR":
                    sr_phase_lengths(K, cfg.n)
                elif kind == "SH":
                    sh_schedule(K, cfg.n)
            except BaiError as exc:
                raise ConfigError(f"{kind}: {exc}") from None
    if not cfg.label:
        cfg.label = _label(cfg)
    return cfg


def _label(cfg: ExperimentConfig) -> str:
    if cfg.matrix is not None:
        return Path(cfg.matrix).name
    base = cfg.setup if cfg.setup is not None else "custom"
    if cfg.adversary is None:
        return base
    member = cfg.member or ("adv1" if cfg.adversary == "two-phase" else "adv")
    return f"{base}:{cfg.adversary}:{member}"


def build_source(cfg: ExperimentConfig):
    """The configured reward source and, for stochastic ones, its gap profile."""
    if cfg.matrix is not None:
        return load_matrix_csv(cfg.matrix), None
    profile = _base_profile(cfg)
    if cfg.adversary is None:
        return bernoulli_source(profile.means, label=cfg.setup or "custom"), profile
    n = cfg.n
    if cfg.adversary == "deception":
        blackout = cfg.blackout_until if cfg.blackout_until is not None else n // 2
        return deception_adversary(profile.means, blackout, n), None
    if cfg.bar_k is None:
        raise ConfigError("the adversary needs bar_k")
    if cfg.adversary == "switch":
        member = cfg.member or "adv"
        if member not in ("sto", "adv"):
            raise ConfigError("member must be sto or adv for the switch adversary")
        i = cfg.i if cfg.i is not None else default_switch_rank(profile)
        sto, adv = switch_adversary_pair(
            profile, cfg.bar_k, i, n,
            switch_round=cfg.switch_round,
            pre_switch_mean=cfg.pre_switch_mean,
            post_switch_mean=cfg.post_switch_mean,
        )
        if member == "sto":
            return sto, gaps_from_means(sto.means)
        return adv, None
    member = cfg.member or "adv1"
    if member not in ("adv1", "adv2"):
        raise ConfigError("member must be adv1 or adv2 for the two-phase adversary")
    adv1, adv2 = two_phase_adversary_pair(profile, cfg.bar_k, n)
    return (adv1 if member == "adv1" else adv2), None
