"""
Lecture et écriture des matrices de détection en CSV.

En-tête `#` : version, empreinte de configuration, graine, circuit, case, durée de
référence, bits de contrôle et une ligne `detector=<id>,<famille>,<coût>` par détecteur.
"""
import csv
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from pydantic import ValidationError

from src import __version__
from src.analysis.matrix import DetectionMatrix, matrix_columns
from src.models.schemas import (
    Case1Fault,
    Case2Fault,
    Detection,
    DetectorInfo,
    InjectionOutcome,
    OutputClass,
)
from src.utils.errors import MatrixFormatError

REQUIRED_KEYS = ("design", "case", "golden_cycles", "control_register_bits")


def _cost(value: float) -> str:
    return format(value, ".10g")


def matrix_header(matrix: DetectionMatrix) -> List[str]:
    """Lignes d'en-tête (sans le préfixe `#`)."""
    lines = [
        f"tool_version={__version__}",
        f"config_digest={matrix.config_digest}",
        f"seed={matrix.seed}",
        f"design={matrix.design}",
        f"case={matrix.case}",
        f"golden_cycles={matrix.golden_cycles}",
        f"control_register_bits={matrix.control_register_bits}",
    ]
    lines += [f"detector={d.detector_id},{d.kind},{_cost(d.cost)}" for d in matrix.detectors]
    return lines


def write_matrix(matrix: DetectionMatrix, path: Path) -> Path:
    """
    Écrit la matrice (une ligne par injection, rangée par inj_id).

    Returns:
        Chemin du fichier écrit
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = matrix.to_frame().sort_values("inj_id", kind="stable")
    with open(path, "w", newline="", encoding="utf-8") as f:
        for line in matrix_header(matrix):
            f.write(f"# {line}\n")
        frame.to_csv(f, index=False, lineterminator="\n")
    return path


def _parse_header(lines: List[Tuple[int, str]]) -> Tuple[Dict[str, str], List[DetectorInfo]]:
    header: Dict[str, str] = {}
    detectors = []
    for number, line in lines:
        key, sep, value = line.lstrip("#").strip().partition("=")
        if not sep:
            continue
        if key == "detector":
            parts = value.split(",")
            if len(parts) != 3:
                raise MatrixFormatError(f"détecteur mal formé : {value}", number)
            try:
                detectors.append(
                    DetectorInfo(detector_id=parts[0], kind=parts[1], cost=float(parts[2]))
                )
            except (ValueError, ValidationError) as e:
                raise MatrixFormatError(f"détecteur invalide ({e})", number) from None
        else:
            header[key] = value
    return header, detectors


def _flag(text: str, name: str) -> bool:
    if text not in ("0", "1"):
        raise ValueError(f"{name} doit valoir 0 ou 1 (reçu {text!r})")
    return text == "1"


def _optional_int(text: str) -> Optional[int]:
    return int(text) if text != "" else None


def _row(record: Dict[str, str], detectors: List[DetectorInfo], case: int, seed: int
         ) -> InjectionOutcome:
    inj_id = int(record["inj_id"])
    if int(record["case"]) != case:
        raise ValueError(f"case {record['case']} différent de l'en-tête ({case})")
    if case == 1:
        fault = Case1Fault(
            register=record["target"], bit=int(record["bit_or_window"]),
            cycle=int(record["cycle"]),
        )
    else:
        fault = Case2Fault(
            inputs=record["target"].split("|"), start_cycle=int(record["cycle"]),
            duration=int(record["bit_or_window"]), seed=seed, index=inj_id,
        )
    detections = []
    for info in detectors:
        name = info.detector_id
        detections.append(Detection(
            detected=_flag(record[f"det_{name}_flag"], f"det_{name}_flag"),
            detect_cycle=_optional_int(record[f"det_{name}_cycle"]),
            via_final=_flag(record[f"det_{name}_final"], f"det_{name}_final"),
        ))
    return InjectionOutcome(
        inj_id=inj_id,
        fault=fault,
        output_class=OutputClass(record["output_class"]),
        cycles_run=int(record["cycles_run"]),
        detections=detections,
    )


def read_matrix(path: Path) -> DetectionMatrix:
    """
    Relit une matrice écrite par `write_matrix`.

    Args:
        path: Fichier CSV

    Returns:
        Matrice de détection

    Raises:
        FileNotFoundError: Si le fichier n'existe pas
        MatrixFormatError: En-tête ou ligne mal formé (numéro de ligne du fichier)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Fichier introuvable : {path.absolute()}")
    with open(path, newline="", encoding="utf-8") as f:
        numbered = list(enumerate(f.read().splitlines(), start=1))

    comments = [(n, line) for n, line in numbered if line.startswith("#")]
    body = [(n, line) for n, line in numbered if line.strip() and not line.startswith("#")]
    header, detectors = _parse_header(comments)
    last = comments[-1][0] if comments else 1
    for key in REQUIRED_KEYS:
        if key not in header:
            raise MatrixFormatError(f"en-tête `{key}` manquant", last)
    try:
        case = int(header["case"])
        seed = int(header.get("seed", "0"))
        golden_cycles = int(header["golden_cycles"])
        control_bits = int(header["control_register_bits"])
    except ValueError as e:
        raise MatrixFormatError(f"en-tête invalide ({e})", last) from None
    if case not in (1, 2):
        raise MatrixFormatError(f"case inconnu : {case}", last)
    if not body:
        raise MatrixFormatError("ligne de colonnes manquante", last + 1)

    columns_line, columns_text = body[0]
    columns = next(csv.reader([columns_text]))
    expected = matrix_columns([d.detector_id for d in detectors])
    if columns != expected:
        raise MatrixFormatError("colonnes différentes des détecteurs de l'en-tête", columns_line)

    rows = []
    for number, text in body[1:]:
        values = next(csv.reader([text]))
        if len(values) != len(columns):
            raise MatrixFormatError(f"{len(values)} valeurs au lieu de {len(columns)}", number)
        try:
            rows.append(_row(dict(zip(columns, values)), detectors, case, seed))
        except (ValueError, KeyError, ValidationError) as e:
            raise MatrixFormatError("; ".join(str(e).splitlines()[:2]), number) from None

    ids = [r.inj_id for r in rows]
    if len(set(ids)) != len(ids):
        raise MatrixFormatError("inj_id dupliqué", body[-1][0])
    return DetectionMatrix(
        design=header["design"],
        case=case,
        golden_cycles=golden_cycles,
        control_register_bits=control_bits,
        detectors=detectors,
        rows=sorted(rows, key=lambda r: r.inj_id),
        config_digest=header.get("config_digest", ""),
        seed=seed,
    )
