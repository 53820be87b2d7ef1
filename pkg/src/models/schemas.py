"""
Schémas Pydantic v2 des fautes injectées, des résultats d'injection et des métriques.
"""
from enum import Enum
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator


class OutputClass(str, Enum):
    """Classification de la sortie d'une exécution fautée."""

    CORRECT = "correct"
    SDC = "sdc"
    PREMATURE = "premature"
    TIMEOUT = "timeout"

    @property
    def is_error(self) -> bool:
        return self is not OutputClass.CORRECT

    @property
    def is_abnormal_termination(self) -> bool:
        return self in (OutputClass.PREMATURE, OutputClass.TIMEOUT)


class Case1Fault(BaseModel):
    """Basculement transitoire d'un bit de registre de contrôle."""

    model_config = ConfigDict(str_strip_whitespace=True, frozen=True, populate_by_name=True)

    case: Literal[1] = 1
    register_path: str = Field(alias="register", description="Chemin du registre de contrôle")
    bit: int = Field(ge=0, description="Indice du bit basculé")
    cycle: int = Field(ge=0, description="Nombre de pas exécutés avant le basculement")

    @property
    def reference_cycle(self) -> int:
        return self.cycle

    @property
    def target(self) -> str:
        return self.register_path

    @property
    def bit_or_window(self) -> str:
        return str(self.bit)


class Case2Fault(BaseModel):
    """Perturbation aléatoire d'entrées primaires de contrôle sur une fenêtre."""

    model_config = ConfigDict(str_strip_whitespace=True, frozen=True)

    case: Literal[2] = 2
    inputs: List[str] = Field(min_length=1, description="Entrées primaires perturbées")
    start_cycle: int = Field(ge=0, description="Premier pas perturbé (0 = premier front)")
    duration: int = Field(default=10, ge=1, description="Durée de la fenêtre en cycles")
    seed: int = Field(description="Graine de la campagne")
    index: int = Field(ge=0, description="Indice de l'injection dans la campagne")

    @property
    def reference_cycle(self) -> int:
        return self.start_cycle

    @property
    def target(self) -> str:
        return "|".join(self.inputs)

    @property
    def bit_or_window(self) -> str:
        return str(self.duration)


FaultSpec = Annotated[Union[Case1Fault, Case2Fault], Field(discriminator="case")]


class Detection(BaseModel):
    """Résultat d'un détecteur pour une injection."""

    model_config = ConfigDict(frozen=True)

    detected: bool = Field(default=False, description="Drapeau de faute levé")
    detect_cycle: Optional[int] = Field(default=None, ge=0, description="Cycle de détection")
    via_final: bool = Field(default=False, description="Détection par contrôle final uniquement")

    @model_validator(mode="after")
    def check_consistency(self) -> "Detection":
        if not self.detected and (self.via_final or self.detect_cycle is not None):
            raise ValueError("Détection absente mais cycle ou contrôle final renseigné")
        if self.detected and not self.via_final and self.detect_cycle is None:
            raise ValueError("Détection en ligne sans cycle")
        return self


class InjectionOutcome(BaseModel):
    """Conséquence classifiée d'une injection et détections associées."""

    model_config = ConfigDict(str_strip_whitespace=True)

    inj_id: int = Field(ge=0, description="Indice de l'injection")
    fault: FaultSpec = Field(description="Faute injectée")
    output_class: OutputClass = Field(description="Classe de sortie")
    cycles_run: int = Field(ge=0, description="Cycles simulés")
    detections: List[Detection] = Field(default_factory=list, description="Une entrée par détecteur")


class DetectorInfo(BaseModel):
    """Détecteur d'une matrice de détection."""

    model_config = ConfigDict(str_strip_whitespace=True, frozen=True)

    detector_id: str = Field(description="Identifiant unique du détecteur")
    kind: Literal["petri", "sequence", "duplication"] = Field(description="Famille du détecteur")
    cost: float = Field(ge=0, description="Coût en unités de surface abstraites")


class Metrics(BaseModel):
    """Taux de détection, part par contrôle final et latence moyenne."""

    model_config = ConfigDict(str_strip_whitespace=True)

    dr: float = Field(ge=0, le=1, description="Taux de détection N_TP / N_OE")
    dr_to: float = Field(ge=0, le=1, description="Part détectée uniquement en fin de simulation")
    latency: Optional[float] = Field(default=None, ge=0, description="Latence moyenne en cycles")
    n_oe: int = Field(ge=0, description="Nombre d'erreurs de sortie")
    n_tp: int = Field(ge=0, description="Nombre de vrais positifs")
    n_to: int = Field(default=0, ge=0, description="Vrais positifs par contrôle final seul")
    n_sdc: int = Field(default=0, ge=0, description="Erreurs de type SDC")
    n_abnormal: int = Field(default=0, ge=0, description="Terminaisons anormales (prématurée, timeout)")
    benign: int = Field(default=0, ge=0, description="Détections sur sortie correcte")

    @model_validator(mode="after")
    def check_ordering(self) -> "Metrics":
        if self.dr_to > self.dr + 1e-12:
            raise ValueError("dr_to ne peut pas dépasser dr")
        return self


class GoldenRecord(BaseModel):
    """Résumé sérialisé d'une exécution de référence (golden.json)."""

    model_config = ConfigDict(str_strip_whitespace=True)

    design: str = Field(description="Identifiant du circuit")
    cycles: int = Field(ge=1, description="Cycles de la simulation de référence")
    output_count: int = Field(ge=0, description="Nombre d'éléments de sortie")
    outputs: List[str] = Field(description="Sorties de référence sérialisées en hexadécimal")
    control_registers: int = Field(ge=0, description="Nombre de registres de contrôle")
    control_register_bits: int = Field(ge=0, description="Nombre total de bits de contrôle")
    nets: List[str] = Field(default_factory=list, description="Réseaux de Petri écrits")
    tables: List[str] = Field(default_factory=list, description="Tables de séquences écrites")
    config_digest: str = Field(description="Empreinte de la configuration")
    seed: int = Field(description="Graine de la configuration")
