"""
Taux de détection (DR), part détectée par contrôle final (DR_TO) et latence moyenne.
"""
from typing import Iterable, List

import numpy as np

from src.analysis.matrix import DetectionMatrix
from src.models.schemas import Metrics, OutputClass
from src.utils.errors import UndefinedMetricError


def subset_indices(matrix: DetectionMatrix, subset: Iterable[str]) -> List[int]:
    """
    Indices de colonnes d'un sous-ensemble de détecteurs.

    Raises:
        ConfigurationError: Détecteur absent de la matrice
    """
    return sorted({matrix.index(name) for name in subset})


def metrics(matrix: DetectionMatrix, subset: Iterable[str]) -> Metrics:
    """
    Calcule les métriques d'un sous-ensemble de détecteurs.

    Une ligne est un vrai positif si la sortie est erronée et qu'au moins un détecteur
    du sous-ensemble a levé son drapeau ; elle compte dans DR_TO si aucun de ces
    détecteurs n'a détecté avant la fin de la simulation. La latence moyenne porte sur
    les autres vrais positifs : première détection en ligne moins le cycle de la faute.

    Args:
        matrix: Matrice de détection
        subset: Identifiants des détecteurs retenus

    Returns:
        Métriques du sous-ensemble

    Raises:
        UndefinedMetricError: Aucune erreur de sortie (N_OE = 0)
        ConfigurationError: Détecteur inconnu
    """
    idx = subset_indices(matrix, subset)
    errors = matrix.error_mask()
    n_oe = int(errors.sum())
    if n_oe == 0:
        raise UndefinedMetricError(
            f"{matrix.design} Case {matrix.case} : aucune erreur de sortie, DR indéfini"
        )

    detected = matrix.detected_matrix()[:, idx].any(axis=1)
    online = matrix.online_matrix()[:, idx].any(axis=1)
    tp = errors & detected
    final_only = tp & ~online
    timely = tp & online

    latency = None
    if timely.any():
        lat = matrix.latency_matrix()[np.ix_(timely, idx)]
        latency = float(np.nanmin(lat, axis=1).mean())

    counts = matrix.class_counts()
    n_tp = int(tp.sum())
    n_to = int(final_only.sum())
    return Metrics(
        dr=n_tp / n_oe,
        dr_to=n_to / n_oe,
        latency=latency,
        n_oe=n_oe,
        n_tp=n_tp,
        n_to=n_to,
        n_sdc=counts[OutputClass.SDC],
        n_abnormal=counts[OutputClass.PREMATURE] + counts[OutputClass.TIMEOUT],
        benign=int((~errors & detected).sum()),
    )
