"""Factored configuration spaces, attacker types, and defender reward model.

A system configuration is a tuple of factor values (one value per factor),
e.g. ``("PHP", "MySQL")``.  Actions name the configuration to switch to, so
the action space equals the configuration space and transitions are
deterministic: the successor of any state under action ``a`` is ``a``.

The defender's per-step reward is

    R(s, a) = M - al(s, a) - alpha * sc(s, a)

where ``al`` is the expected attack loss under the current belief over
attacker types and ``sc`` is the configuration switching cost.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from itertools import product

import numpy as np

LABEL_SEP = "|"


class DomainError(ValueError):
    """Raised for malformed domain definitions, labels, or indices."""


@dataclass(frozen=True)
class FactorSpec:
    """One state factor: a name and its ordered value labels."""

    name: str
    values: tuple[str, ...]

    def __post_init__(self) -> None:
        if not self.values:
            raise DomainError(f"factor {self.name!r} has no values")
        if len(set(self.values)) != len(self.values):
            raise DomainError(f"factor {self.name!r} has duplicate values")


@dataclass(frozen=True)
class ConfigSpace:
    """Cartesian product of factors with a flat, order-stable enumeration.

    Configurations are enumerated in C order (last factor varies fastest);
    the flat index of a configuration is its position in that enumeration.
    """

    factors: tuple[FactorSpec, ...]
    configs: tuple[tuple[str, ...], ...] = field(init=False)

    def __post_init__(self) -> None:
        if not self.factors:
            raise DomainError("configuration space needs at least one factor")
        names = [f.name for f in self.factors]
        if len(set(names)) != len(names):
            raise DomainError("factor names must be unique")
        configs = tuple(product(*(f.values for f in self.factors)))
        object.__setattr__(self, "configs", configs)

    @property
    def n_configs(self) -> int:
        return len(self.configs)

    @property
    def n_factors(self) -> int:
        return len(self.factors)

    def index_of(self, config: tuple[str, ...]) -> int:
        try:
            return self.configs.index(tuple(config))
        except ValueError:
            raise DomainError(f"unknown configuration {config!r}") from None

    def config_at(self, index: int) -> tuple[str, ...]:
        if not 0 <= index < self.n_configs:
            raise DomainError(f"configuration index {index} out of range")
        return self.configs[index]

    def label(self, index: int) -> str:
        return LABEL_SEP.join(self.config_at(index))

    def index_of_label(self, label: str) -> int:
        return self.index_of(tuple(label.split(LABEL_SEP)))

    def labels(self) -> list[str]:
        return [LABEL_SEP.join(c) for c in self.configs]


def next_state(space: ConfigSpace, state: int, action: int) -> int:
    """Deterministic transition: the action names the successor configuration."""
    if not 0 <= state < space.n_configs:
        raise DomainError(f"state index {state} out of range")
    if not 0 <= action < space.n_configs:
        raise DomainError(f"action index {action} out of range")
    return action


@dataclass(frozen=True)
class AttackerTypeSpec:
    """An attacker type: per-configuration success rate and defender loss.

    ``mu[c]`` is the probability an attack by this type succeeds against
    configuration ``c``; ``loss[c]`` is the (positive) defender loss if it
    does.  ``is_unknown`` marks the catch-all type used for attackers absent
    from the defender's threat catalogue.
    """

    id: str
    is_unknown: bool
    mu: np.ndarray
    loss: np.ndarray

    def __post_init__(self) -> None:
        mu = np.asarray(self.mu, dtype=float)
        loss = np.asarray(self.loss, dtype=float)
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "loss", loss)
        if mu.shape != loss.shape:
            raise DomainError(f"type {self.id!r}: mu and loss shapes differ")
        if np.any(~np.isfinite(mu)) or np.any((mu < 0) | (mu > 1)):
            raise DomainError(f"type {self.id!r}: mu must lie in [0, 1]")
        if np.any(~np.isfinite(loss)) or np.any(loss < 0):
            raise DomainError(f"type {self.id!r}: losses must be finite and >= 0")

    @classmethod
    def from_maps(
        cls,
        space: ConfigSpace,
        type_id: str,
        is_unknown: bool,
        mu_map: dict[str, float],
        loss_map: dict[str, float],
    ) -> "AttackerTypeSpec":
        """Build from label-keyed maps; missing labels mean no capability (0)."""
        labels = space.labels()
        for m in (mu_map, loss_map):
            for key in m:
                if key not in labels:
                    raise DomainError(f"type {type_id!r}: unknown configuration label {key!r}")
        mu = np.array([float(mu_map.get(lab, 0.0)) for lab in labels])
        loss = np.array([float(loss_map.get(lab, 0.0)) for lab in labels])
        return cls(type_id, is_unknown, mu, loss)


@dataclass
class DomainInfo:
    """A complete defender problem: configurations, threats, costs, constants.

    Immutable by convention after construction.  ``sc[s, a]`` is the switching
    cost of taking action ``a`` in state ``s``; ``alpha`` weights it in the
    reward.  ``gamma`` is the discount used by planning components.
    """

    space: ConfigSpace
    types: tuple[AttackerTypeSpec, ...]
    sc: np.ndarray
    M: float
    gamma: float
    alpha: float

    def __post_init__(self) -> None:
        self.types = tuple(self.types)
        n = self.space.n_configs
        self.sc = np.asarray(self.sc, dtype=float)
        if self.sc.shape != (n, n):
            raise DomainError(f"switching cost table must be {n}x{n}")
        if np.any(~np.isfinite(self.sc)) or np.any(self.sc < 0):
            raise DomainError("switching costs must be finite and >= 0")
        if not np.isfinite(self.M):
            raise DomainError("M must be finite")
        if not 0.0 <= self.gamma < 1.0:
            raise DomainError("gamma must lie in [0, 1)")
        if not (np.isfinite(self.alpha) and self.alpha >= 0):
            raise DomainError("alpha must be finite and >= 0")
        ids = [t.id for t in self.types]
        if len(set(ids)) != len(ids):
            raise DomainError("attacker type ids must be unique")
        if sum(t.is_unknown for t in self.types) > 1:
            raise DomainError("at most one unknown attacker type")
        for t in self.types:
            if t.mu.shape != (n,):
                raise DomainError(f"type {t.id!r}: tables must cover all {n} configurations")
        # Dense views used by the solvers; types indexed in declaration order.
        self.mu_table = np.stack([t.mu for t in self.types]) if self.types else np.zeros((0, n))
        self.loss_table = (
            np.stack([t.loss for t in self.types]) if self.types else np.zeros((0, n))
        )
        unknowns = [i for i, t in enumerate(self.types) if t.is_unknown]
        self.unknown_index = unknowns[0] if unknowns else None

    @property
    def n_types(self) -> int:
        return len(self.types)

    @property
    def n_configs(self) -> int:
        return self.space.n_configs

    def type_index(self, type_id: str) -> int:
        for i, t in enumerate(self.types):
            if t.id == type_id:
                return i
        raise DomainError(f"unknown attacker type {type_id!r}")

    def type_ids(self) -> list[str]:
        return [t.id for t in self.types]


def cvss_to_params(exploitability_score: float, impact_score: float) -> tuple[float, float]:
    """Map CVSS subscores to model parameters: mu = 0.1*ES, loss = 10*IS.

    Both scores live on the CVSS [0, 10] scale; losses are stored positive.
    """
    es = float(exploitability_score)
    iscore = float(impact_score)
    if not (np.isfinite(es) and 0.0 <= es <= 10.0):
        raise DomainError(f"exploitability score {es} outside [0, 10]")
    if not (np.isfinite(iscore) and 0.0 <= iscore <= 10.0):
        raise DomainError(f"impact score {iscore} outside [0, 10]")
    return 0.1 * es, 10.0 * iscore


def attacker_types_from_cvss_csv(space: ConfigSpace, path: str) -> list[AttackerTypeSpec]:
    """Build attacker types from a CVSS CSV.

    Columns: config_label, attacker_type, ES, IS — one row per
    (configuration, type, vulnerability).  A type's mu/loss against a
    configuration are the averages of 0.1*ES and 10*IS over its rows for that
    configuration; absent pairs mean no capability.  A type with id
    ``unknown`` becomes the catch-all unknown type.
    """
    sums: dict[str, dict[str, list[float]]] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"config_label", "attacker_type", "ES", "IS"}
        if reader.fieldnames is None or not required.issubset(reader.fieldnames):
            raise DomainError(f"CVSS CSV must have columns {sorted(required)}")
        for row in reader:
            label = row["config_label"]
            if label not in space.labels():
                raise DomainError(f"CVSS CSV references unknown configuration {label!r}")
            mu, loss = cvss_to_params(float(row["ES"]), float(row["IS"]))
            cell = sums.setdefault(row["attacker_type"], {}).setdefault(label, [0.0, 0.0, 0])
            cell[0] += mu
            cell[1] += loss
            cell[2] += 1
    types = []
    for type_id in sorted(sums):
        mu_map = {lab: vals[0] / vals[2] for lab, vals in sums[type_id].items()}
        loss_map = {lab: vals[1] / vals[2] for lab, vals in sums[type_id].items()}
        types.append(
            AttackerTypeSpec.from_maps(space, type_id, type_id == "unknown", mu_map, loss_map)
        )
    return types


# ---------------------------------------------------------------------------
# Reward model (expected losses under a belief over attacker types)
# ---------------------------------------------------------------------------


def _as_posterior(domain: DomainInfo, posterior: np.ndarray) -> np.ndarray:
    p = np.asarray(posterior, dtype=float)
    if p.shape != (domain.n_types,):
        raise DomainError(f"posterior must have one entry per type ({domain.n_types})")
    return p


def attack_loss_given_success(
    domain: DomainInfo, posterior: np.ndarray, state: int, action: int
) -> float:
    """Expected loss conditioned on the attack succeeding.

    al(s, a, phi=1) = sum_t P(t|s,a) mu(t, a) l(t, a) / sum_t P(t|s,a) mu(t, a);
    0 when no believed type can succeed against the target configuration.
    """
    p = _as_posterior(domain, posterior)
    target = next_state(domain.space, state, action)
    num = float(np.sum(p * domain.mu_table[:, target] * domain.loss_table[:, target]))
    den = float(np.sum(p * domain.mu_table[:, target]))
    return num / den if den > 0.0 else 0.0


def expected_attack_loss(
    domain: DomainInfo, posterior: np.ndarray, state: int, action: int
) -> float:
    """Unconditional expected loss: al(s, a) = sum_t P(t|s,a) mu(t, a) l(t, a)."""
    p = _as_posterior(domain, posterior)
    target = next_state(domain.space, state, action)
    return float(np.sum(p * domain.mu_table[:, target] * domain.loss_table[:, target]))


def expected_reward(domain: DomainInfo, posterior: np.ndarray, state: int, action: int) -> float:
    """R(s, a) = M - al(s, a) - alpha * sc(s, a)."""
    return float(
        domain.M
        - expected_attack_loss(domain, posterior, state, action)
        - domain.alpha * domain.sc[state, action]
    )


def expected_attack_loss_table(domain: DomainInfo, posterior_table: np.ndarray) -> np.ndarray:
    """Vectorized al(s, a) for a full (n_types, S, A) belief table."""
    p = np.asarray(posterior_table, dtype=float)
    n, s = domain.n_types, domain.n_configs
    if p.shape != (n, s, s):
        raise DomainError(f"posterior table must have shape ({n}, {s}, {s})")
    # target configuration of (s, a) is a, so weight by mu/loss at column a
    weights = domain.mu_table * domain.loss_table  # (n_types, A)
    return np.einsum("tsa,ta->sa", p, weights)


def expected_reward_table(domain: DomainInfo, posterior_table: np.ndarray) -> np.ndarray:
    """Vectorized R(s, a) table."""
    return domain.M - expected_attack_loss_table(domain, posterior_table) - domain.alpha * domain.sc


def success_prob_table(domain: DomainInfo, posterior_table: np.ndarray) -> np.ndarray:
    """Vectorized attack success probability sum_t P(t|s,a) mu(t, a), clamped to [0,1]."""
    p = np.asarray(posterior_table, dtype=float)
    return np.clip(np.einsum("tsa,ta->sa", p, domain.mu_table), 0.0, 1.0)


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------


def domain_to_dict(domain: DomainInfo) -> dict:
    labels = domain.space.labels()
    return {
        "factors": [{"name": f.name, "values": list(f.values)} for f in domain.space.factors],
        "attacker_types": [
            {
                "id": t.id,
                "unknown": t.is_unknown,
                "mu": {lab: float(v) for lab, v in zip(labels, t.mu)},
                "loss": {lab: float(v) for lab, v in zip(labels, t.loss)},
            }
            for t in domain.types
        ],
        "switching_cost": {
            s_lab: {a_lab: float(domain.sc[i, j]) for j, a_lab in enumerate(labels)}
            for i, s_lab in enumerate(labels)
        },
        "M": float(domain.M),
        "gamma": float(domain.gamma),
    }


def domain_from_dict(data: dict, alpha: float = 1.0) -> DomainInfo:
    try:
        factors = tuple(
            FactorSpec(f["name"], tuple(f["values"])) for f in data["factors"]
        )
        space = ConfigSpace(factors)
        types = tuple(
            AttackerTypeSpec.from_maps(
                space, t["id"], bool(t.get("unknown", False)), t["mu"], t["loss"]
            )
            for t in data["attacker_types"]
        )
        labels = space.labels()
        sc_map = data["switching_cost"]
        sc = np.zeros((space.n_configs, space.n_configs))
        for i, s_lab in enumerate(labels):
            if s_lab not in sc_map:
                raise DomainError(f"switching_cost missing state {s_lab!r}")
            for j, a_lab in enumerate(labels):
                if a_lab not in sc_map[s_lab]:
                    raise DomainError(f"switching_cost missing pair ({s_lab!r}, {a_lab!r})")
                sc[i, j] = float(sc_map[s_lab][a_lab])
        return DomainInfo(space, types, sc, float(data["M"]), float(data["gamma"]), alpha)
    except KeyError as exc:
        raise DomainError(f"domain JSON missing field {exc}") from None


def save_domain(domain: DomainInfo, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(domain_to_dict(domain), fh, indent=2)
        fh.write("\n")


def load_domain(path: str, alpha: float = 1.0) -> DomainInfo:
    with open(path, encoding="utf-8") as fh:
        return domain_from_dict(json.load(fh), alpha=alpha)
