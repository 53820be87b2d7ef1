"""
Hiérarchie d'erreurs du projet.

Chaque erreur dérive d'une exception standard pour rester attrapable par les
appelants qui ne connaissent pas ce module.
"""
from typing import Any, Optional


class ConfigurationError(ValueError):
    """Configuration invalide : paramètre hors domaine, signal inconnu, fichier absent."""


class ContractViolationError(RuntimeError):
    """Appel hors précondition (ex. tir d'une transition non franchissable)."""


class TraceInvariantError(RuntimeError):
    """Violation d'un invariant interne de trace (largeur de ligne incohérente)."""


class DesignDefectError(RuntimeError):
    """Le modèle de circuit diverge de son oracle fonctionnel."""

    def __init__(self, message: str, fault: Optional[Any] = None):
        """
        Initialise l'erreur.

        Args:
            message: Description du défaut
            fault: FaultSpec en cours d'exécution au moment du défaut, si applicable
        """
        self.detail = message
        self.fault = fault
        if fault is not None:
            message = f"{message} (faute : {fault!r})"
        super().__init__(message)

    def __reduce__(self):
        # franchit la frontière des processus de campagne avec sa faute
        return (type(self), (self.detail, self.fault))


class UndefinedMetricError(ValueError):
    """Métrique indéfinie (aucune erreur de sortie, N_OE = 0)."""


class InfeasibleTargetError(ValueError):
    """Objectif de taux de détection inatteignable."""

    def __init__(self, target: float, max_dr: float):
        super().__init__(
            f"Taux de détection cible {target:.4f} inatteignable "
            f"(maximum atteignable : {max_dr:.4f})"
        )
        self.target = target
        self.max_dr = max_dr


class MatrixFormatError(ValueError):
    """Fichier de matrice de détection mal formé."""

    def __init__(self, message: str, row: int):
        super().__init__(f"Ligne {row}: {message}")
        self.row = row
