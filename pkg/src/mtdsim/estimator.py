"""Online attacker-type estimation from observed attack successes.

The defender keeps a count ``n[tau, s, a]`` of successful attacks by type
``tau`` observed while taking action ``a`` in state ``s``.  Every update
first divides all counts by a decay factor ``beta >= 1`` (older observations
weigh less) and then increments the matching cell when the step's attack
succeeded.

The belief over types at a pair (s, a) normalizes the success counts against
each type's success rate: a type that succeeds often relative to how often it
*would* succeed is likely the one attacking.  The unknown catch-all type has
no catalogued rate and scores with rate 1.
"""

from __future__ import annotations

import json

import numpy as np

from .domain import DomainError, DomainInfo

COUNT_FLOOR = 1e-12


class ThreatEstimator:
    """Decayed success counts and the derived attacker-type posterior."""

    def __init__(self, domain: DomainInfo, beta: float = 2.0):
        if not beta >= 1.0:
            raise DomainError("decay factor beta must be >= 1")
        self.domain = domain
        self.beta = float(beta)
        n, s = domain.n_types, domain.n_configs
        self.counts = np.zeros((n, s, s))
        # Scoring rates: catalogued types use their true success rate, the
        # unknown type scores with rate 1 (no catalogue entry to compare to).
        eff = domain.mu_table.copy()
        if domain.unknown_index is not None:
            eff[domain.unknown_index, :] = 1.0
        self._eff_mu = eff  # (n_types, A); rate against the pair's target a

    def update(self, tau: int, state: int, action: int, phi: int) -> None:
        """Decay all counts by beta, then credit the cell on a success.

        Decayed counts below a tiny floor are snapped to zero so that
        abandoned cells genuinely forget (a pure ratio would otherwise stay
        concentrated forever regardless of decay).
        """
        self.counts /= self.beta
        self.counts[self.counts < COUNT_FLOOR] = 0.0
        if phi:
            if not 0 <= tau < self.domain.n_types:
                raise DomainError(f"type index {tau} out of range")
            self.counts[tau, state, action] += 1.0

    def posterior(self, state: int, action: int) -> np.ndarray:
        """Belief over attacker types for the pair (state, action).

        Scores are n / rate for types whose rate against the target is
        positive (the unknown type always scores, with rate 1).  If every
        score is zero the belief falls back to uniform over the types capable
        of succeeding against the target — or all zeros if none are.
        """
        return self.posterior_table()[:, state, action]

    def posterior_table(self) -> np.ndarray:
        """Full (n_types, S, A) belief table; see :meth:`posterior`."""
        capable = self._eff_mu > 0.0  # (n_types, A)
        n_types, n = self.counts.shape[0], self.counts.shape[1]
        cap = np.broadcast_to(capable[:, None, :], (n_types, n, n))
        with np.errstate(divide="ignore", invalid="ignore"):
            scores = np.where(cap, self.counts / self._eff_mu[:, None, :], 0.0)
        totals = scores.sum(axis=0)  # (S, A)
        out = np.zeros_like(scores)
        seen = totals > 0.0
        out[:, seen] = scores[:, seen] / totals[seen]
        n_capable = cap.sum(axis=0)  # (S, A)
        fallback = (~seen) & (n_capable > 0)
        out[:, fallback] = cap[:, fallback] / n_capable[fallback]
        return out

    def to_dict(self) -> dict:
        return {
            "beta": self.beta,
            "type_ids": self.domain.type_ids(),
            "state_labels": self.domain.space.labels(),
            "counts": self.counts.tolist(),
        }

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(self.to_dict(), fh)
            fh.write("\n")

    @classmethod
    def from_dict(cls, domain: DomainInfo, data: dict) -> "ThreatEstimator":
        est = cls(domain, beta=float(data["beta"]))
        if data.get("type_ids") != domain.type_ids():
            raise DomainError("estimator checkpoint does not match the domain's types")
        counts = np.asarray(data["counts"], dtype=float)
        if counts.shape != est.counts.shape:
            raise DomainError("estimator checkpoint count table has the wrong shape")
        if np.any(counts < 0) or np.any(~np.isfinite(counts)):
            raise DomainError("estimator checkpoint counts must be finite and >= 0")
        est.counts = counts
        return est

    @classmethod
    def load(cls, domain: DomainInfo, path: str) -> "ThreatEstimator":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(domain, json.load(fh))


def attack_success_prob(domain: DomainInfo, posterior: np.ndarray, state: int, action: int) -> float:
    """Believed probability that an attack on the pair's target succeeds.

    sum_t P(t|s,a) mu(t, target), clamped to [0, 1]; uses the catalogued
    (true) rates, including the unknown type's.
    """
    p = np.asarray(posterior, dtype=float)
    if p.shape != (domain.n_types,):
        raise DomainError(f"posterior must have one entry per type ({domain.n_types})")
    target = action
    return float(np.clip(np.sum(p * domain.mu_table[:, target]), 0.0, 1.0))
