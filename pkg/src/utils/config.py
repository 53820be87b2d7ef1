"""
Configuration globale avec pydantic-settings et configuration de campagne (fichier TOML).
"""
import hashlib
import sys
from functools import lru_cache
from pathlib import Path
from typing import List, Literal, Optional, Tuple

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    PrivateAttr,
    ValidationInfo,
    field_validator,
    model_validator,
)
from pydantic_settings import BaseSettings, SettingsConfigDict

from src.analysis.area import AreaModel
from src.utils.errors import ConfigurationError

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DESIGN_IDS = ("conv", "gaus", "aes", "router")


class Settings(BaseSettings):
    """Réglages du processus (fichier .env ou variables d'environnement)."""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore"
    )

    default_workers: int = 1
    output_dir: str = "out"
    show_progress: bool = True
    stimulus_dir: str = "data/stimuli"
    config_dir: str = "configs"

    def get_output_path(self) -> Path:
        """Retourne le chemin absolu du répertoire de sortie (créé si besoin)."""
        path = Path(self.output_dir).resolve()
        path.mkdir(parents=True, exist_ok=True)
        return path

    def get_config_path(self) -> Path:
        return Path(self.config_dir).resolve()


@lru_cache()
def get_settings() -> Settings:
    """
    Retourne l'instance singleton de la configuration.

    Returns:
        Instance de Settings
    """
    return Settings()


def _resolve(value: Optional[Path], info: ValidationInfo) -> Optional[Path]:
    if value is None:
        return None
    base = (info.context or {}).get("base_dir")
    path = Path(value)
    if not path.is_absolute() and base is not None:
        path = Path(base) / path
    return path


class _Section(BaseModel):
    model_config = ConfigDict(str_strip_whitespace=True, extra="forbid")


class CampaignSection(_Section):
    """Section [campaign] : plan d'injection."""

    design: Literal["conv", "gaus", "aes", "router"] = Field(description="Circuit ciblé")
    case: Literal[1, 2] = Field(description="Case 1 (registres) ou Case 2 (entrées)")
    seed: int = Field(ge=0, description="Graine de tous les tirages aléatoires")
    injections_per_bit: int = Field(default=10, ge=0, description="Injections par bit (Case 1)")
    injections: int = Field(default=1000, ge=0, description="Nombre d'injections (Case 2)")
    duration: int = Field(default=10, ge=1, description="Fenêtre de perturbation (Case 2)")
    budget_multiplier: float = Field(default=2.0, description="Budget en multiple du run de référence")
    workers: Optional[int] = Field(default=None, ge=1, description="Processus de simulation")
    output_dir: Optional[Path] = Field(default=None, description="Répertoire des artefacts")

    @field_validator("output_dir")
    @classmethod
    def resolve_output(cls, value: Optional[Path], info: ValidationInfo) -> Optional[Path]:
        return _resolve(value, info)


class StimulusSection(_Section):
    """Section [stimulus] : fichiers hexadécimaux et paramètres du banc de test."""

    activations: Optional[Path] = Field(default=None, description="Activations Conv 8x8")
    weights: Optional[Path] = Field(default=None, description="Poids Conv 4x9")
    relu: Literal[0, 1] = Field(default=1, description="ReLU activée (Conv)")
    image: Optional[Path] = Field(default=None, description="Image Gaus 16x12")
    plaintexts: Optional[Path] = Field(default=None, description="Blocs en clair AES")
    key: str = Field(default="000102030405060708090a0b0c0d0e0f", description="Clé AES-128 (hex)")

    @field_validator("activations", "weights", "image", "plaintexts")
    @classmethod
    def resolve_files(cls, value: Optional[Path], info: ValidationInfo) -> Optional[Path]:
        return _resolve(value, info)

    @field_validator("key")
    @classmethod
    def check_key(cls, value: str) -> str:
        try:
            key = int(value, 16)
        except ValueError:
            raise ValueError(f"clé AES non hexadécimale : {value}") from None
        if len(value) > 32 or key >> 128:
            raise ValueError("la clé AES fait 128 bits")
        return value.lower()

    @property
    def key_int(self) -> int:
        return int(self.key, 16)


class MonitorsSection(_Section):
    """Section [monitors] : détecteurs évalués."""

    nets: Optional[List[str]] = Field(default=None, description="Réseaux livrés retenus (tous par défaut)")
    presets: Optional[List[str]] = Field(default=None, description="Préréglages de séquences (tous par défaut)")
    net_files: List[Path] = Field(default_factory=list, description="Réseaux supplémentaires (.pn)")
    table_files: List[Path] = Field(default_factory=list, description="Tables apprises à réutiliser (.seq)")

    @field_validator("net_files", "table_files")
    @classmethod
    def resolve_paths(cls, values: List[Path], info: ValidationInfo) -> List[Path]:
        return [_resolve(v, info) for v in values]


class NocSection(_Section):
    """Section [noc] : paramètres du scénario du maillage."""

    mesh: int = Field(default=4, ge=2, le=4)
    monitored: int = Field(default=2, ge=0)
    multicast_source: int = Field(default=2, ge=0)
    multicast_destinations: List[int] = Field(default_factory=lambda: [6, 10, 14, 7, 11, 15])
    multicast_packets: int = Field(default=8, ge=0)
    unicasts: List[Tuple[int, int]] = Field(default_factory=lambda: [(6, 7), (10, 11), (14, 15)])
    unicast_packets: int = Field(default=2, ge=0)
    unicast_interval: int = Field(default=64, ge=1)
    flits_per_packet: int = Field(default=9, ge=2)
    seed: int = Field(default=2024, description="Graine des charges utiles")


class CampaignConfig(_Section):
    """Fichier de configuration complet d'une campagne."""

    campaign: CampaignSection
    stimulus: StimulusSection = Field(default_factory=StimulusSection)
    monitors: MonitorsSection = Field(default_factory=MonitorsSection)
    area: AreaModel = Field(default_factory=AreaModel)
    noc: Optional[NocSection] = None

    _source: Optional[Path] = PrivateAttr(default=None)
    _digest: str = PrivateAttr(default="")

    @model_validator(mode="after")
    def check_files(self) -> "CampaignConfig":
        required = {
            "conv": ("activations", "weights"),
            "gaus": ("image",),
            "aes": ("plaintexts",),
            "router": (),
        }[self.campaign.design]
        for name in required:
            if getattr(self.stimulus, name) is None:
                raise ValueError(f"stimulus.{name} requis pour {self.campaign.design}")
        files = [getattr(self.stimulus, n) for n in required]
        files += self.monitors.net_files + self.monitors.table_files
        for path in files:
            if not path.exists():
                raise ValueError(f"fichier introuvable : {path.absolute()}")
        if self.noc is not None and self.campaign.design != "router":
            raise ValueError("la section [noc] ne concerne que le routeur")
        return self

    @property
    def digest(self) -> str:
        return self._digest

    @property
    def source(self) -> Optional[Path]:
        return self._source

    def output_path(self, override: Optional[Path] = None) -> Path:
        """Répertoire des artefacts : option de ligne de commande, config, puis réglages."""
        if override is not None:
            path = Path(override)
        elif self.campaign.output_dir is not None:
            path = self.campaign.output_dir
        else:
            path = Path(get_settings().output_dir) / f"{self.campaign.design}_case{self.campaign.case}"
        path.mkdir(parents=True, exist_ok=True)
        return path


def config_digest(raw: bytes) -> str:
    """Empreinte courte (16 chiffres hexadécimaux) du contenu d'un fichier de configuration."""
    return hashlib.sha256(raw).hexdigest()[:16]


def load_campaign_config(path: Path) -> CampaignConfig:
    """
    Charge et valide un fichier de configuration TOML.

    Args:
        path: Chemin du fichier ; les chemins relatifs qu'il contient sont résolus
            par rapport à son répertoire

    Returns:
        Configuration validée, avec son empreinte

    Raises:
        ConfigurationError: Fichier introuvable ou TOML mal formé
        pydantic.ValidationError: Clé inconnue, valeur invalide ou fichier référencé absent
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Fichier de configuration introuvable : {path.absolute()}")
    raw = path.read_bytes()
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as e:
        raise ConfigurationError(f"{path} : TOML invalide ({e})") from e
    config = CampaignConfig.model_validate(data, context={"base_dir": path.parent.resolve()})
    config._source = path
    config._digest = config_digest(raw)
    return config
