"""
Fixtures partagées : fichiers de configuration temporaires et matrices de détection
construites à la main.
"""
from pathlib import Path
from typing import Sequence, Union

import pytest

from src.analysis.matrix import DetectionMatrix
from src.models.schemas import (
    Case1Fault,
    Case2Fault,
    Detection,
    DetectorInfo,
    InjectionOutcome,
    OutputClass,
)

ROOT = Path(__file__).resolve().parent.parent
STIMULI = ROOT / "data" / "stimuli"
FIXTURES = Path(__file__).resolve().parent / "fixtures"

STIMULUS_LINES = {
    "conv": [
        f'activations = "{(STIMULI / "conv_activations.csv").as_posix()}"',
        f'weights = "{(STIMULI / "conv_weights.csv").as_posix()}"',
    ],
    "gaus": [f'image = "{(STIMULI / "gaus_image.csv").as_posix()}"'],
    "aes": [f'plaintexts = "{(STIMULI / "aes_plaintexts.csv").as_posix()}"'],
    "router": [],
}


def write_config(directory: Path, design: str, case: int = 1, extra: str = "",
                 **campaign) -> Path:
    """
    Écrit un fichier TOML de campagne dont les artefacts vont dans `directory/out`.

    Args:
        directory: Répertoire temporaire
        design: conv, gaus, aes ou router
        case: 1 ou 2
        extra: Sections TOML ajoutées telles quelles
        **campaign: Clés supplémentaires de la section [campaign]
    """
    values = {"design": design, "case": case, "seed": 7, "injections_per_bit": 1,
              "injections": 4, "workers": 1}
    values.update(campaign)
    lines = ["[campaign]"]
    for key, value in values.items():
        lines.append(f'{key} = "{value}"' if isinstance(value, str) else f"{key} = {value}")
    lines.append(f'output_dir = "{(directory / "out").as_posix()}"')
    lines += ["", "[stimulus]"] + STIMULUS_LINES[design]
    path = directory / f"{design}_case{case}.toml"
    path.write_text("\n".join(lines) + "\n" + extra, encoding="utf-8")
    return path


Cell = Union[None, int, str]


def detection(cell: Cell) -> Detection:
    """None : rien ; entier : détection en ligne à ce cycle ; "final" : contrôle final."""
    if cell is None:
        return Detection()
    if cell == "final":
        return Detection(detected=True, via_final=True)
    return Detection(detected=True, detect_cycle=cell)


@pytest.fixture
def make_matrix():
    """Fabrique de matrices : une ligne = (classe, cycle de la faute, cellules)."""

    def _make(rows: Sequence[tuple], detectors: Sequence[tuple], case: int = 1,
              control_register_bits: int = 9, design: str = "aes",
              seed: int = 0) -> DetectionMatrix:
        infos = [DetectorInfo(detector_id=name, kind=kind, cost=cost)
                 for name, kind, cost in detectors]
        outcomes = []
        for inj_id, (output_class, cycle, cells) in enumerate(rows):
            if case == 1:
                fault = Case1Fault(register="enc/round", bit=inj_id % 4, cycle=cycle)
            else:
                fault = Case2Fault(inputs=["pt_valid", "pt_eos"], start_cycle=cycle,
                                   seed=seed, index=inj_id)
            outcomes.append(InjectionOutcome(
                inj_id=inj_id,
                fault=fault,
                output_class=OutputClass(output_class),
                cycles_run=100,
                detections=[detection(c) for c in cells],
            ))
        return DetectionMatrix(
            design=design, case=case, golden_cycles=100,
            control_register_bits=control_register_bits,
            detectors=infos, rows=outcomes, seed=seed,
        )

    return _make


@pytest.fixture
def aes_config(tmp_path) -> Path:
    """Configuration AES Case 1 réduite (un basculement par bit)."""
    return write_config(tmp_path, "aes", 1)
