"""
Modèle de surface abstrait des détecteurs (unités de coût linéaires).
"""
from typing import Union

from pydantic import BaseModel, ConfigDict, Field

from src.monitors.petri import PetriBinding
from src.monitors.sequence import SequenceTable
from src.utils.errors import ConfigurationError


class AreaModel(BaseModel):
    """Coefficients du modèle de surface ; section [area] de la configuration."""

    model_config = ConfigDict(str_strip_whitespace=True, extra="forbid", frozen=True)

    a: float = Field(default=1.0, ge=0, description="Coût par place")
    b: float = Field(default=1.0, ge=0, description="Coût par transition")
    c: float = Field(default=2.0, ge=0, description="Coût par bit de clé d'état")
    d: float = Field(default=0.25, ge=0, description="Coût par paire de la table")
    e: float = Field(default=2.0, ge=0, description="Coût par bit de registre dupliqué")
    simple_event: float = Field(default=1.0, ge=0, description="Événement de type 1 ou 2")
    counter_event: float = Field(default=3.0, ge=0, description="Événement à compteur (types 3 et 4)")


def petri_cost(binding: PetriBinding, model: AreaModel) -> float:
    """
    a·|P| + b·|T| + coût des événements.

    Raises:
        ConfigurationError: Si le réseau n'a aucun événement lié
    """
    if not binding.events:
        raise ConfigurationError(f"{binding.name} : réseau sans événement lié")
    events = sum(
        model.simple_event if ev.etype in (1, 2) else model.counter_event for ev in binding.events
    )
    net = binding.net
    return model.a * len(net.places) + model.b * len(net.transitions) + events


def sequence_cost(table: SequenceTable, model: AreaModel) -> float:
    """c·largeur de clé + d·nombre de paires."""
    return model.c * table.width + model.d * len(table.pairs)


def duplication_cost(control_register_bits: int, model: AreaModel) -> float:
    return model.e * control_register_bits


def area_model(detector: Union[PetriBinding, SequenceTable, int],
               model: AreaModel = AreaModel()) -> float:
    """
    Coût d'un détecteur : réseau lié, table de séquences ou nombre de bits dupliqués.

    Raises:
        ConfigurationError: Réseau sans événement ou type de détecteur inconnu
    """
    if isinstance(detector, PetriBinding):
        return petri_cost(detector, model)
    if isinstance(detector, SequenceTable):
        return sequence_cost(detector, model)
    if isinstance(detector, int) and not isinstance(detector, bool):
        return duplication_cost(detector, model)
    raise ConfigurationError(f"Détecteur sans modèle de surface : {type(detector).__name__}")
