"""
Sélection de sous-ensembles de détecteurs sous contrainte de surface ou de taux de
détection, et courbes compromis surface / DR.

Jusqu'à `EXHAUSTIVE_LIMIT` détecteurs la recherche est exhaustive : le nombre d'erreurs
couvertes par chaque sous-ensemble est obtenu par une somme sur les sous-masques.
Au-delà, un glouton (gain marginal par unité de coût) classe les détecteurs et la
recherche exhaustive est refaite sur les `EXHAUSTIVE_LIMIT` premiers.
"""
import math
from dataclasses import dataclass
from typing import Iterable, List, Literal, Optional, Sequence, Tuple

import numpy as np

from src.analysis.matrix import DetectionMatrix
from src.analysis.metrics import metrics
from src.models.schemas import Metrics
from src.utils.errors import ConfigurationError, InfeasibleTargetError, UndefinedMetricError

EXHAUSTIVE_LIMIT = 20
COST_TOLERANCE = 1e-9

Mode = Literal["max-dr", "min-area"]


@dataclass(frozen=True)
class Selection:
    """Sous-ensemble retenu, ses métriques et son coût."""

    subset: Tuple[str, ...]
    metrics: Metrics
    cost: float


@dataclass(frozen=True)
class TradeoffPoint:
    budget: float
    dr: float
    dr_to: float
    subset: Tuple[str, ...]


class SubsetSpace:
    """Couverture et coût de tous les sous-ensembles d'au plus 20 détecteurs."""

    def __init__(self, ids: Sequence[str], costs: Sequence[float], detected: np.ndarray):
        """
        Initialise l'espace de recherche.

        Args:
            ids: Identifiants des détecteurs (bit j = détecteur j)
            costs: Coût de chaque détecteur
            detected: Booléens (erreurs de sortie x détecteurs)
        """
        n = len(ids)
        if n > EXHAUSTIVE_LIMIT:
            raise ConfigurationError(f"Recherche exhaustive limitée à {EXHAUSTIVE_LIMIT} détecteurs")
        self.ids = list(ids)
        self.n_oe = int(detected.shape[0])

        self.costs = np.zeros(1)
        for c in costs:
            self.costs = np.concatenate([self.costs, self.costs + c])

        weights = np.left_shift(1, np.arange(n, dtype=np.int64))
        masks = (detected.astype(np.int64) * weights).sum(axis=1, dtype=np.int64)
        inside = np.bincount(masks, minlength=1 << n).astype(np.int64)
        # inside[m] = lignes dont le masque de détection est inclus dans m
        for j in range(n):
            view = inside.reshape(-1, 2, 1 << j)
            view[:, 1, :] += view[:, 0, :]
        full = (1 << n) - 1
        self.covered = self.n_oe - inside[full ^ np.arange(1 << n, dtype=np.int64)]

    def names(self, mask: int) -> Tuple[str, ...]:
        return tuple(sorted(self.ids[j] for j in range(len(self.ids)) if mask >> j & 1))

    def best_under_budget(self, budget: float) -> int:
        """Masque couvrant le plus d'erreurs pour un coût <= budget."""
        feasible = np.flatnonzero(self.costs <= budget + COST_TOLERANCE)
        best = self.covered[feasible].max()
        cand = feasible[self.covered[feasible] == best]
        cheapest = self.costs[cand].min()
        cand = cand[self.costs[cand] <= cheapest + COST_TOLERANCE]
        return int(min(cand, key=lambda m: self.names(int(m))))

    def cheapest_reaching(self, needed: int) -> Optional[int]:
        """Masque le moins coûteux couvrant au moins `needed` erreurs (None si aucun)."""
        feasible = np.flatnonzero(self.covered >= needed)
        if feasible.size == 0:
            return None
        cheapest = self.costs[feasible].min()
        cand = feasible[self.costs[feasible] <= cheapest + COST_TOLERANCE]
        best = self.covered[cand].max()
        cand = cand[self.covered[cand] == best]
        return int(min(cand, key=lambda m: self.names(int(m))))


def _candidates(matrix: DetectionMatrix, detector_ids: Optional[Iterable[str]]) -> List[str]:
    if detector_ids is None:
        ids = matrix.detector_ids
    else:
        ids = list(dict.fromkeys(detector_ids))
        for name in ids:
            matrix.index(name)
    if not ids:
        raise ConfigurationError("Aucun détecteur à sélectionner")
    return ids


def _error_columns(matrix: DetectionMatrix, ids: Sequence[str]) -> np.ndarray:
    errors = matrix.error_mask()
    if not errors.any():
        raise UndefinedMetricError(
            f"{matrix.design} Case {matrix.case} : aucune erreur de sortie, sélection impossible"
        )
    cols = [matrix.index(name) for name in ids]
    return matrix.detected_matrix()[errors][:, cols]


def _ranking(ids: Sequence[str], costs: np.ndarray, detected: np.ndarray,
             budget: Optional[float], needed: Optional[int]) -> List[int]:
    """Ordre glouton (gain marginal par coût) puis détecteurs restants par gain seul."""
    covered = np.zeros(detected.shape[0], dtype=bool)
    chosen: List[int] = []
    spent = 0.0
    while True:
        if needed is not None and covered.sum() >= needed:
            break
        gains = (detected & ~covered[:, None]).sum(axis=0)
        best_key, best_j = None, None
        for j in range(len(ids)):
            if j in chosen or gains[j] == 0:
                continue
            if budget is not None and spent + costs[j] > budget + COST_TOLERANCE:
                continue
            score = gains[j] / costs[j] if costs[j] > 0 else math.inf
            key = (-score, costs[j], ids[j])
            if best_key is None or key < best_key:
                best_key, best_j = key, j
        if best_j is None:
            break
        chosen.append(best_j)
        spent += costs[best_j]
        covered |= detected[:, best_j]

    alone = detected.sum(axis=0)
    rest = sorted(
        (j for j in range(len(ids)) if j not in chosen),
        key=lambda j: (-(alone[j] / costs[j] if costs[j] > 0 else math.inf), costs[j], ids[j]),
    )
    return chosen + rest


def _search(ids: List[str], costs: np.ndarray, detected: np.ndarray, mode: Mode,
            budget: Optional[float], needed: Optional[int]) -> Optional[Tuple[str, ...]]:
    if len(ids) <= EXHAUSTIVE_LIMIT:
        space = SubsetSpace(ids, costs, detected)
        mask = space.best_under_budget(budget) if mode == "max-dr" else space.cheapest_reaching(needed)
        return None if mask is None else space.names(mask)

    order = _ranking(ids, costs, detected, budget if mode == "max-dr" else None,
                     needed if mode == "min-area" else None)
    top = order[:EXHAUSTIVE_LIMIT]
    refined = _search([ids[j] for j in top], costs[top], detected[:, top], mode, budget, needed)

    # solution gloutonne pure : préfixe de l'ordre qui respecte la contrainte
    prefix: List[int] = []
    spent = 0.0
    covered = np.zeros(detected.shape[0], dtype=bool)
    for j in order:
        if mode == "max-dr" and spent + costs[j] > budget + COST_TOLERANCE:
            continue
        if mode == "min-area" and covered.sum() >= needed:
            break
        prefix.append(j)
        spent += costs[j]
        covered |= detected[:, j]
    candidates = [refined] if refined is not None else []
    if mode == "max-dr" or covered.sum() >= needed:
        candidates.append(tuple(sorted(ids[j] for j in prefix)))
    if not candidates:
        return None

    index = {name: j for j, name in enumerate(ids)}

    def score(subset: Tuple[str, ...]):
        cols = [index[name] for name in subset]
        hit = int(detected[:, cols].any(axis=1).sum()) if cols else 0
        cost = round(float(sum(costs[c] for c in cols)), 9)
        if mode == "max-dr":
            return (-hit, cost, subset)
        return (cost, -hit, subset)

    return min(candidates, key=score)


def select_detectors(
    matrix: DetectionMatrix,
    mode: Mode = "max-dr",
    budget: Optional[float] = None,
    dr_target: Optional[float] = None,
    detector_ids: Optional[Iterable[str]] = None,
) -> Selection:
    """
    Choisit une combinaison de détecteurs.

    `max-dr` maximise le DR sous un budget de surface (égalités : coût le plus faible,
    puis identifiants dans l'ordre lexicographique). `min-area` minimise la surface pour
    un DR cible (égalités : DR le plus élevé, puis ordre lexicographique).

    Args:
        matrix: Matrice de détection
        mode: max-dr ou min-area
        budget: Budget de surface (max-dr)
        dr_target: DR visé dans [0, 1] (min-area)
        detector_ids: Détecteurs candidats (tous par défaut)

    Returns:
        Sous-ensemble retenu avec ses métriques et son coût

    Raises:
        ConfigurationError: Paramètre manquant ou hors domaine, aucun détecteur
        InfeasibleTargetError: DR cible supérieur au DR de tous les candidats réunis
        UndefinedMetricError: Aucune erreur de sortie
    """
    ids = _candidates(matrix, detector_ids)
    costs = np.array([matrix.detector(name).cost for name in ids])
    detected = _error_columns(matrix, ids)
    n_oe = detected.shape[0]

    if mode == "max-dr":
        if budget is None or budget < 0:
            raise ConfigurationError(f"Budget de surface invalide : {budget}")
        subset = _search(ids, costs, detected, mode, budget, None)
    elif mode == "min-area":
        if dr_target is None or not 0 <= dr_target <= 1:
            raise ConfigurationError(f"DR cible invalide : {dr_target}")
        needed = math.ceil(dr_target * n_oe - 1e-9)
        reachable = int(detected.any(axis=1).sum())
        if reachable < needed:
            raise InfeasibleTargetError(dr_target, reachable / n_oe)
        subset = _search(ids, costs, detected, mode, None, needed)
        if subset is None:
            raise InfeasibleTargetError(dr_target, reachable / n_oe)
    else:
        raise ConfigurationError(f"Mode de sélection inconnu : {mode}")

    cost = float(sum(matrix.detector(name).cost for name in subset))
    return Selection(subset=subset, metrics=metrics(matrix, subset), cost=cost)


def tradeoff_curve(matrix: DetectionMatrix, budgets: Sequence[float],
                   detector_ids: Optional[Iterable[str]] = None) -> List[TradeoffPoint]:
    """
    Meilleur DR atteignable pour chaque budget de surface.

    Le DR de la courbe ne décroît pas : si un budget plus grand ne fait pas mieux que
    le précédent, la combinaison précédente est conservée.

    Raises:
        ConfigurationError: Budgets non triés ou négatifs
    """
    budgets = list(budgets)
    if any(b < 0 for b in budgets):
        raise ConfigurationError("Budgets négatifs")
    if budgets != sorted(budgets):
        raise ConfigurationError("Les budgets doivent être triés par ordre croissant")
    ids = _candidates(matrix, detector_ids)

    points: List[TradeoffPoint] = []
    previous: Optional[Selection] = None
    for budget in budgets:
        selection = select_detectors(matrix, "max-dr", budget=budget, detector_ids=ids)
        if previous is not None and selection.metrics.n_tp < previous.metrics.n_tp:
            selection = previous
        points.append(TradeoffPoint(
            budget=budget,
            dr=selection.metrics.dr,
            dr_to=selection.metrics.dr_to,
            subset=selection.subset,
        ))
        previous = selection
    return points
