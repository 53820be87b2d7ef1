"""
Registre des circuits : construction depuis la configuration, oracles fonctionnels et
échelle des circuits d'origine (pour orientation dans les rapports).
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

from src.designs.aes import AesStimulus, aes_oracle, build_aes
from src.designs.conv import ConvStimulus, build_conv, conv_oracle
from src.designs.gaus import GausStimulus, build_gaus, gaus_oracle
from src.designs.router import NocScenario, NocStimulus, build_router_scenario, noc_oracle
from src.designs.stimulus import load_hex_matrix, load_plaintexts
from src.monitors.bundle import MonitorBundle
from src.sim.design import Design, StimulusProgram
from src.utils.config import DESIGN_IDS, CampaignConfig, NocSection
from src.utils.errors import ConfigurationError


@dataclass(frozen=True)
class ReferenceScale:
    """Échelle publiée d'un circuit d'origine."""

    golden_cycles: int
    control_registers: int
    control_register_bits: int
    dr_case1: float
    dr_case2: float


REFERENCE_SCALE: Dict[str, ReferenceScale] = {
    "conv": ReferenceScale(20_521, 29, 246, 0.995, 0.999),
    "gaus": ReferenceScale(8_676, 11, 35, 0.880, 0.963),
    "aes": ReferenceScale(432, 4, 9, 0.953, 0.999),
    "router": ReferenceScale(2_798, 106, 321, 0.954, 0.478),
}


@dataclass
class DesignSetup:
    """Circuit, détecteurs livrés et banc de test d'une configuration."""

    design: Design
    bundle: MonitorBundle
    stimulus: StimulusProgram


def _check_id(design_id: str) -> None:
    if design_id not in DESIGN_IDS:
        raise ConfigurationError(
            f"Circuit inconnu : {design_id} (attendu : {', '.join(DESIGN_IDS)})"
        )


def noc_scenario(section: Optional[NocSection]) -> NocScenario:
    """Convertit la section [noc] (absente = scénario par défaut)."""
    if section is None:
        return NocScenario()
    return NocScenario(
        mesh=section.mesh,
        monitored=section.monitored,
        multicast_source=section.multicast_source,
        multicast_destinations=tuple(section.multicast_destinations),
        multicast_packets=section.multicast_packets,
        unicasts=tuple(tuple(pair) for pair in section.unicasts),
        unicast_packets=section.unicast_packets,
        unicast_interval=section.unicast_interval,
        flits_per_packet=section.flits_per_packet,
        seed=section.seed,
    )


def build_design(design_id: str, config: Optional[CampaignConfig] = None
                 ) -> Tuple[Design, MonitorBundle]:
    """
    Construit une instance neuve du circuit et ses détecteurs livrés.

    Args:
        design_id: conv, gaus, aes ou router
        config: Configuration (clé AES, scénario NoC) ; valeurs par défaut si absente

    Raises:
        ConfigurationError: Identifiant de circuit inconnu
    """
    _check_id(design_id)
    if design_id == "conv":
        return build_conv()
    if design_id == "gaus":
        return build_gaus()
    if design_id == "aes":
        key = config.stimulus.key_int if config is not None else int(
            "000102030405060708090a0b0c0d0e0f", 16)
        return build_aes(key)
    return build_router_scenario(noc_scenario(config.noc if config is not None else None))


def build_stimulus(config: CampaignConfig) -> StimulusProgram:
    """
    Charge le banc de test décrit par la section [stimulus].

    Raises:
        FileNotFoundError: Fichier de stimulus absent
        ConfigurationError: Contenu invalide
    """
    design_id = config.campaign.design
    section = config.stimulus
    if design_id == "conv":
        activations = load_hex_matrix(section.activations, 8, 8, signed=True)
        weights = load_hex_matrix(section.weights, 4, 9, signed=True)
        return ConvStimulus(activations, weights, section.relu)
    if design_id == "gaus":
        return GausStimulus(load_hex_matrix(section.image, 12, 16))
    if design_id == "aes":
        return AesStimulus(section.key_int, load_plaintexts(section.plaintexts))
    return NocStimulus(noc_scenario(config.noc))


def load_setup(config: CampaignConfig) -> DesignSetup:
    design, bundle = build_design(config.campaign.design, config)
    return DesignSetup(design, bundle, build_stimulus(config))


def oracle_output(design_id: str, stimulus: StimulusProgram) -> Any:
    """Sortie de référence d'un banc de test, indépendante du modèle au cycle près."""
    _check_id(design_id)
    if design_id == "conv":
        return conv_oracle(stimulus.activations, stimulus.weights, stimulus.relu)
    if design_id == "gaus":
        return gaus_oracle(stimulus.image)
    if design_id == "aes":
        return aes_oracle(stimulus)
    return noc_oracle(stimulus.scenario)
