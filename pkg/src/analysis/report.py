"""
Rapports de campagne : métriques par détecteur et par famille, courbe compromis,
répartition des erreurs de sortie et échelle des circuits d'origine.
"""
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import pandas as pd
from rich.console import Console
from rich.table import Table
from tabulate import tabulate

from src.analysis.area import AreaModel
from src.analysis.duplication import DUPLICATION_ID, duplication_baseline
from src.analysis.matrix import DetectionMatrix
from src.analysis.metrics import metrics
from src.analysis.selection import TradeoffPoint
from src.designs.registry import REFERENCE_SCALE
from src.models.schemas import OutputClass
from src.utils.errors import UndefinedMetricError

console = Console(stderr=True)

METRIC_COLUMNS = ["subset", "cost", "dr", "dr_to", "latency", "n_oe", "n_tp", "benign"]
TRADEOFF_COLUMNS = ["budget", "dr", "dr_to", "subset"]
FAMILIES = ("petri", "sequence", "all", "all+duplication")


def with_duplication(matrix: DetectionMatrix, model: AreaModel = AreaModel()) -> DetectionMatrix:
    """Ajoute la colonne de duplication si elle est absente."""
    if DUPLICATION_ID in matrix.detector_ids:
        return matrix
    return duplication_baseline(matrix, model)


def family_members(matrix: DetectionMatrix, family: str) -> List[str]:
    """
    Détecteurs d'une famille : petri, sequence, all (tous les détecteurs simulés) ou
    all+duplication (la référence par duplication en plus).

    Raises:
        ValueError: Famille inconnue
    """
    if family == "all":
        return [d.detector_id for d in matrix.detectors if d.kind != "duplication"]
    if family == "all+duplication":
        return matrix.detector_ids
    if family in ("petri", "sequence"):
        return matrix.ids_of_kind(family)
    raise ValueError(f"Famille inconnue : {family} (attendu : {', '.join(FAMILIES)})")


def family_subsets(matrix: DetectionMatrix) -> Dict[str, List[str]]:
    """Sous-ensembles évalués : chaque détecteur, chaque famille et l'union des familles."""
    subsets: Dict[str, List[str]] = {name: [name] for name in matrix.detector_ids}
    petri = matrix.ids_of_kind("petri")
    sequence = matrix.ids_of_kind("sequence")
    if petri:
        subsets["family:petri"] = petri
    if sequence:
        subsets["family:sequence"] = sequence
    if petri and sequence:
        subsets["family:petri+sequence"] = petri + sequence
    return subsets


def _row(matrix: DetectionMatrix, label: str, members: Sequence[str]) -> Dict:
    cost = float(sum(matrix.detector(name).cost for name in members))
    try:
        m = metrics(matrix, members)
    except UndefinedMetricError:
        cols = [matrix.index(name) for name in members]
        benign = int(matrix.detected_matrix()[:, cols].any(axis=1).sum())
        return {"subset": label, "cost": cost, "dr": None, "dr_to": None, "latency": None,
                "n_oe": 0, "n_tp": 0, "benign": benign}
    return {"subset": label, "cost": cost, "dr": m.dr, "dr_to": m.dr_to, "latency": m.latency,
            "n_oe": m.n_oe, "n_tp": m.n_tp, "benign": m.benign}


def metrics_frame(matrix: DetectionMatrix) -> pd.DataFrame:
    """Une ligne de métriques par détecteur, par famille et pour l'union."""
    rows = [_row(matrix, label, members) for label, members in family_subsets(matrix).items()]
    return pd.DataFrame(rows, columns=METRIC_COLUMNS)


def tradeoff_frame(points: Sequence[TradeoffPoint]) -> pd.DataFrame:
    return pd.DataFrame(
        [{"budget": p.budget, "dr": p.dr, "dr_to": p.dr_to, "subset": "+".join(p.subset)}
         for p in points],
        columns=TRADEOFF_COLUMNS,
    )


def breakdown(matrix: DetectionMatrix) -> Dict[str, float]:
    """
    Répartition des erreurs de sortie entre SDC et terminaisons anormales.

    Returns:
        Comptes par classe, N_OE et parts (0 si N_OE = 0)
    """
    counts = matrix.class_counts()
    n_oe = sum(n for c, n in counts.items() if c.is_error)
    abnormal = counts[OutputClass.PREMATURE] + counts[OutputClass.TIMEOUT]
    return {
        "injections": len(matrix),
        "correct": counts[OutputClass.CORRECT],
        "sdc": counts[OutputClass.SDC],
        "premature": counts[OutputClass.PREMATURE],
        "timeout": counts[OutputClass.TIMEOUT],
        "n_oe": n_oe,
        "sdc_share": counts[OutputClass.SDC] / n_oe if n_oe else 0.0,
        "abnormal_share": abnormal / n_oe if n_oe else 0.0,
    }


def report_header(matrix: DetectionMatrix, tool_version: str) -> List[str]:
    """En-tête `#` des CSV de rapport (version, empreinte, graine, répartition)."""
    stats = breakdown(matrix)
    return [
        f"tool_version={tool_version}",
        f"config_digest={matrix.config_digest}",
        f"seed={matrix.seed}",
        f"design={matrix.design}",
        f"case={matrix.case}",
        f"injections={stats['injections']}",
        f"n_oe={stats['n_oe']}",
        f"sdc={stats['sdc']}",
        f"premature={stats['premature']}",
        f"timeout={stats['timeout']}",
    ]


def write_csv(frame: pd.DataFrame, path: Path, header: Sequence[str] = ()) -> Path:
    """Écrit un DataFrame précédé de lignes `#` ; valeurs absentes laissées vides."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        for line in header:
            f.write(f"# {line}\n")
        frame.to_csv(f, index=False, lineterminator="\n", float_format="%.6f")
    return path


def render_plain(frame: pd.DataFrame) -> str:
    """Tableau texte (tabulate) pour la sortie standard."""
    return tabulate(frame.fillna("-").values.tolist(), headers=list(frame.columns),
                    tablefmt="simple", floatfmt=".4f")


def _fmt(value: Optional[float], pattern: str = "{:.4f}") -> str:
    if value is None or pd.isna(value):
        return "-"
    return pattern.format(value)


def print_metrics(matrix: DetectionMatrix, frame: pd.DataFrame) -> None:
    """Affiche les métriques, la répartition des erreurs et l'échelle d'origine."""
    table = Table(title=f"{matrix.design} Case {matrix.case} ({len(matrix)} injections)")
    for column in METRIC_COLUMNS:
        table.add_column(column, justify="left" if column == "subset" else "right")
    for record in frame.to_dict("records"):
        table.add_row(
            record["subset"], _fmt(record["cost"], "{:.2f}"), _fmt(record["dr"]),
            _fmt(record["dr_to"]), _fmt(record["latency"], "{:.1f}"), str(record["n_oe"]),
            str(record["n_tp"]), str(record["benign"]),
        )
    console.print(table)

    stats = breakdown(matrix)
    if stats["n_oe"]:
        console.print(
            f"📊 Erreurs de sortie : {stats['n_oe']} / {stats['injections']}, "
            f"SDC {stats['sdc_share']:.1%}, terminaisons anormales {stats['abnormal_share']:.1%} "
            f"(prématurées {stats['premature']}, timeouts {stats['timeout']})"
        )
    else:
        console.print("⚠️  Aucune erreur de sortie : DR indéfini")

    scale = REFERENCE_SCALE.get(matrix.design)
    if scale is not None:
        published = scale.dr_case1 if matrix.case == 1 else scale.dr_case2
        console.print(
            f"📏 Circuit d'origine : {scale.golden_cycles} cycles, "
            f"{scale.control_registers} registres de contrôle ({scale.control_register_bits} bits), "
            f"DR publié {published:.1%} ; ici : {matrix.golden_cycles} cycles, "
            f"{matrix.control_register_bits} bits"
        )
