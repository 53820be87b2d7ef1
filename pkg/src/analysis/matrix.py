"""
Matrice de détection : une ligne par injection, une colonne par détecteur.
"""
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from src.models.schemas import (
    Detection,
    DetectorInfo,
    InjectionOutcome,
    OutputClass,
)
from src.utils.errors import ConfigurationError, ContractViolationError


@dataclass
class DetectionMatrix:
    """Résultats d'une campagne et métadonnées nécessaires aux métriques."""

    design: str
    case: int
    golden_cycles: int
    control_register_bits: int
    detectors: List[DetectorInfo] = field(default_factory=list)
    rows: List[InjectionOutcome] = field(default_factory=list)
    config_digest: str = ""
    seed: int = 0

    def __post_init__(self):
        ids = [d.detector_id for d in self.detectors]
        if len(set(ids)) != len(ids):
            raise ConfigurationError(f"Identifiants de détecteurs dupliqués : {ids}")
        for row in self.rows:
            self._check_row(row)

    def _check_row(self, row: InjectionOutcome) -> None:
        if len(row.detections) != len(self.detectors):
            raise ContractViolationError(
                f"Injection {row.inj_id} : {len(row.detections)} détections pour "
                f"{len(self.detectors)} détecteurs"
            )

    # -- accès ---------------------------------------------------------------

    @property
    def detector_ids(self) -> List[str]:
        return [d.detector_id for d in self.detectors]

    def detector(self, detector_id: str) -> DetectorInfo:
        for d in self.detectors:
            if d.detector_id == detector_id:
                return d
        raise ConfigurationError(f"Détecteur inconnu : {detector_id}")

    def index(self, detector_id: str) -> int:
        try:
            return self.detector_ids.index(detector_id)
        except ValueError:
            raise ConfigurationError(f"Détecteur inconnu : {detector_id}") from None

    def ids_of_kind(self, kind: str) -> List[str]:
        return [d.detector_id for d in self.detectors if d.kind == kind]

    def append(self, row: InjectionOutcome) -> None:
        self._check_row(row)
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    # -- vues vectorisées ----------------------------------------------------

    def error_mask(self) -> np.ndarray:
        """Lignes dont la sortie est erronée (comptées dans N_OE)."""
        return np.array([r.output_class.is_error for r in self.rows], dtype=bool)

    def class_counts(self) -> Dict[OutputClass, int]:
        counts = {c: 0 for c in OutputClass}
        for r in self.rows:
            counts[r.output_class] += 1
        return counts

    def detected_matrix(self) -> np.ndarray:
        """Booléens (lignes x détecteurs) : drapeau levé."""
        return np.array(
            [[d.detected for d in r.detections] for r in self.rows], dtype=bool
        ).reshape(len(self.rows), len(self.detectors))

    def online_matrix(self) -> np.ndarray:
        """Booléens (lignes x détecteurs) : détection en ligne (hors contrôle final)."""
        return np.array(
            [[d.detected and not d.via_final for d in r.detections] for r in self.rows],
            dtype=bool,
        ).reshape(len(self.rows), len(self.detectors))

    def latency_matrix(self) -> np.ndarray:
        """Cycles entre la faute et la détection en ligne ; NaN sans détection en ligne."""
        out = np.full((len(self.rows), len(self.detectors)), np.nan)
        for i, r in enumerate(self.rows):
            ref = r.fault.reference_cycle
            for j, d in enumerate(r.detections):
                if d.detected and not d.via_final:
                    out[i, j] = d.detect_cycle - ref
        return out

    def bitmasks(self) -> Dict[str, np.ndarray]:
        """
        Colonnes empaquetées en entiers : bit j = détecteur j.

        Returns:
            Dictionnaire avec `detected` et `online` (uint64 par ligne)

        Raises:
            ConfigurationError: Plus de 64 détecteurs
        """
        if len(self.detectors) > 64:
            raise ConfigurationError("Au plus 64 détecteurs pour les masques binaires")
        weights = np.left_shift(np.uint64(1), np.arange(len(self.detectors), dtype=np.uint64))
        det = self.detected_matrix().astype(np.uint64)
        onl = self.online_matrix().astype(np.uint64)
        return {
            "detected": (det * weights).sum(axis=1, dtype=np.uint64),
            "online": (onl * weights).sum(axis=1, dtype=np.uint64),
        }

    # -- transformations -----------------------------------------------------

    def with_detector(self, info: DetectorInfo, detections: Sequence[Detection]
                      ) -> "DetectionMatrix":
        """
        Retourne une copie avec une colonne de détecteur supplémentaire.

        Raises:
            ConfigurationError: Identifiant déjà présent ou nombre de détections incorrect
        """
        if info.detector_id in self.detector_ids:
            raise ConfigurationError(f"Détecteur déjà présent : {info.detector_id}")
        if len(detections) != len(self.rows):
            raise ConfigurationError(
                f"{len(detections)} détections pour {len(self.rows)} injections"
            )
        rows = [
            r.model_copy(update={"detections": list(r.detections) + [d]})
            for r, d in zip(self.rows, detections)
        ]
        return DetectionMatrix(
            design=self.design,
            case=self.case,
            golden_cycles=self.golden_cycles,
            control_register_bits=self.control_register_bits,
            detectors=list(self.detectors) + [info],
            rows=rows,
            config_digest=self.config_digest,
            seed=self.seed,
        )

    def restricted(self, detector_ids: Sequence[str]) -> "DetectionMatrix":
        """Copie limitée aux détecteurs donnés (dans l'ordre de la matrice)."""
        wanted = set(detector_ids)
        keep = [i for i, d in enumerate(self.detectors) if d.detector_id in wanted]
        missing = wanted - set(self.detector_ids)
        if missing:
            raise ConfigurationError(f"Détecteurs inconnus : {', '.join(sorted(missing))}")
        rows = [
            r.model_copy(update={"detections": [r.detections[i] for i in keep]})
            for r in self.rows
        ]
        return DetectionMatrix(
            design=self.design,
            case=self.case,
            golden_cycles=self.golden_cycles,
            control_register_bits=self.control_register_bits,
            detectors=[self.detectors[i] for i in keep],
            rows=rows,
            config_digest=self.config_digest,
            seed=self.seed,
        )

    def to_frame(self) -> pd.DataFrame:
        """DataFrame aux colonnes du format CSV de la matrice."""
        records = []
        for r in self.rows:
            fault = r.fault
            record = {
                "inj_id": r.inj_id,
                "case": fault.case,
                "target": fault.target,
                "bit_or_window": fault.bit_or_window,
                "cycle": fault.reference_cycle,
                "output_class": r.output_class.value,
                "cycles_run": r.cycles_run,
            }
            for info, det in zip(self.detectors, r.detections):
                name = info.detector_id
                record[f"det_{name}_flag"] = int(det.detected)
                record[f"det_{name}_cycle"] = det.detect_cycle
                record[f"det_{name}_final"] = int(det.via_final)
            records.append(record)
        columns = matrix_columns(self.detector_ids)
        frame = pd.DataFrame.from_records(records, columns=columns)
        for info in self.detectors:
            frame[f"det_{info.detector_id}_cycle"] = frame[
                f"det_{info.detector_id}_cycle"
            ].astype("Int64")
        return frame


BASE_COLUMNS = ["inj_id", "case", "target", "bit_or_window", "cycle", "output_class", "cycles_run"]


def matrix_columns(detector_ids: Sequence[str]) -> List[str]:
    columns = list(BASE_COLUMNS)
    for name in detector_ids:
        columns += [f"det_{name}_flag", f"det_{name}_cycle", f"det_{name}_final"]
    return columns

