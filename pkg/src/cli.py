"""
Point d'entrée en ligne de commande : golden, campaign, report et select.

Exécutable en tant que module : python -m src.cli <commande> --config <fichier.toml>

Codes de sortie : 0 succès, 1 erreur de configuration, 2 défaut de circuit ou de
détecteur, 3 erreur d'entrée/sortie ou matrice mal formée.
"""
import argparse
import math
import sys
from pathlib import Path
from typing import List, Optional, Sequence

import pandas as pd
from pydantic import ValidationError
from rich.console import Console

from src import __version__
from src.analysis.area import AreaModel
from src.analysis.report import (
    FAMILIES,
    METRIC_COLUMNS,
    family_members,
    metrics_frame,
    print_metrics,
    render_plain,
    report_header,
    tradeoff_frame,
    with_duplication,
    write_csv,
)
from src.analysis.selection import select_detectors, tradeoff_curve
from src.campaign.fault_engine import campaign
from src.campaign.golden import golden, load_context, write_golden
from src.campaign.matrix_io import read_matrix, write_matrix
from src.utils.config import CampaignConfig, load_campaign_config
from src.utils.errors import (
    ConfigurationError,
    ContractViolationError,
    DesignDefectError,
    InfeasibleTargetError,
    MatrixFormatError,
    TraceInvariantError,
    UndefinedMetricError,
)

console = Console(stderr=True)

MATRIX_CSV = "matrix.csv"
METRICS_CSV = "metrics.csv"
TRADEOFF_CSV = "tradeoff.csv"
SELECTION_CSV = "selection.csv"
SELECTION_COLUMNS = ["mode", "constraint"] + METRIC_COLUMNS


class _Parser(argparse.ArgumentParser):
    """Analyseur dont les erreurs d'usage sont des erreurs de configuration (code 1)."""

    def error(self, message):
        raise ConfigurationError(f"{self.prog} : {message}")


def parse_budgets(text: str) -> List[float]:
    """
    Liste de budgets séparés par des virgules (`inf` accepté), triée.

    Raises:
        ConfigurationError: Valeur non numérique ou négative
    """
    budgets = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            value = math.inf if item.lower() in ("inf", "∞") else float(item)
        except ValueError:
            raise ConfigurationError(f"Budget invalide : {item}") from None
        if value < 0 or math.isnan(value):
            raise ConfigurationError(f"Budget invalide : {item}")
        budgets.append(value)
    return sorted(budgets)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="cfed",
        description="Détecteurs d'erreurs de flot de contrôle : campagnes d'injection et analyse",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    cmd = commands.add_parser("golden", help="Run de référence, tables apprises, réseaux")
    cmd.add_argument("--config", type=Path, required=True, help="Fichier de configuration TOML")
    cmd.add_argument("--out", type=Path, default=None, help="Répertoire des artefacts")

    cmd = commands.add_parser("campaign", help="Campagne d'injection de fautes")
    cmd.add_argument("--config", type=Path, required=True, help="Fichier de configuration TOML")
    cmd.add_argument("--out", type=Path, default=None, help="Répertoire des artefacts")
    cmd.add_argument("--workers", type=int, default=None, help="Processus de simulation")
    cmd.add_argument("--no-progress", action="store_true", help="Sans barre de progression")

    for name, help_text in (("report", "Métriques et courbe compromis"),
                            ("select", "Sélection de détecteurs sous contrainte")):
        cmd = commands.add_parser(name, help=help_text)
        cmd.add_argument("--config", type=Path, default=None, help="Fichier de configuration TOML")
        cmd.add_argument("--matrix", type=Path, action="append", default=None,
                         help="Matrice de détection (répétable)")
        cmd.add_argument("--out", type=Path, default=None, help="Répertoire des rapports")
        cmd.add_argument("--budgets", type=parse_budgets, default=None,
                         help="Budgets de surface séparés par des virgules (ex. 0,10,50,inf)")
        cmd.add_argument("--family", choices=FAMILIES, default="all",
                         help="Famille de détecteurs candidats")
        cmd.add_argument("--plain", action="store_true",
                         help="Tableau texte sur la sortie standard")
        if name == "select":
            cmd.add_argument("--dr-target", type=float, default=None, help="DR cible (min-area)")
    return parser


def cmd_golden(args) -> int:
    """Run de référence : golden.json, trace, tables apprises et réseaux."""
    config = load_campaign_config(args.config)
    out = config.output_path(args.out)
    paths = write_golden(golden(config), out)
    console.print(f"✅ {len(paths)} fichiers écrits dans {out}")
    return 0


def cmd_campaign(args) -> int:
    """Campagne d'injection : matrix.csv (progression sur la sortie d'erreur)."""
    config = load_campaign_config(args.config)
    if args.workers is not None and args.workers < 1:
        raise ConfigurationError(f"--workers doit être >= 1 (reçu {args.workers})")
    out = config.output_path(args.out)
    context = load_context(config, out)
    matrix = campaign(context, workers=args.workers,
                      show_progress=False if args.no_progress else None)
    path = write_matrix(matrix, out / MATRIX_CSV)
    console.print(f"✅ Matrice écrite : {path}")
    return 0


def _matrix_paths(args, config: Optional[CampaignConfig]) -> List[Path]:
    if args.matrix:
        return list(args.matrix)
    if config is None:
        raise ConfigurationError("--config ou --matrix requis")
    return [config.output_path() / MATRIX_CSV]


def _output_file(args, matrix_path: Path, name: str, several: bool, matrix) -> Path:
    if args.out is None:
        return matrix_path.parent / name
    Path(args.out).mkdir(parents=True, exist_ok=True)
    if several:
        return Path(args.out) / f"{matrix.design}_case{matrix.case}_{name}"
    return Path(args.out) / name


def _load(args):
    config = load_campaign_config(args.config) if args.config is not None else None
    model = config.area if config is not None else AreaModel()
    paths = _matrix_paths(args, config)
    for path in paths:
        yield path, with_duplication(read_matrix(path), model), len(paths) > 1


def cmd_report(args) -> int:
    """Métriques par détecteur, par famille, duplication et courbe compromis."""
    for path, matrix, several in _load(args):
        frame = metrics_frame(matrix)
        header = report_header(matrix, __version__)
        written = [write_csv(frame, _output_file(args, path, METRICS_CSV, several, matrix), header)]
        if args.budgets:
            try:
                points = tradeoff_curve(matrix, args.budgets, family_members(matrix, args.family))
            except UndefinedMetricError as e:
                console.print(f"⚠️  Courbe compromis ignorée : {e}")
            else:
                written.append(write_csv(
                    tradeoff_frame(points),
                    _output_file(args, path, TRADEOFF_CSV, several, matrix),
                    header + [f"family={args.family}"],
                ))
        if args.plain:
            print(render_plain(frame))
        else:
            print_metrics(matrix, frame)
        for item in written:
            console.print(f"✅ {item}")
    return 0


def _selection_row(mode: str, constraint: float, selection) -> dict:
    m = selection.metrics
    return {
        "mode": mode, "constraint": constraint, "subset": "+".join(selection.subset),
        "cost": selection.cost, "dr": m.dr, "dr_to": m.dr_to, "latency": m.latency,
        "n_oe": m.n_oe, "n_tp": m.n_tp, "benign": m.benign,
    }


def cmd_select(args) -> int:
    """Sélection sous budget(s) de surface et/ou pour un DR cible."""
    if not args.budgets and args.dr_target is None:
        raise ConfigurationError("--budgets ou --dr-target requis")
    for path, matrix, several in _load(args):
        candidates = family_members(matrix, args.family)
        rows = []
        for budget in args.budgets or []:
            rows.append(_selection_row(
                "max-dr", budget,
                select_detectors(matrix, "max-dr", budget=budget, detector_ids=candidates),
            ))
        if args.dr_target is not None:
            rows.append(_selection_row(
                "min-area", args.dr_target,
                select_detectors(matrix, "min-area", dr_target=args.dr_target,
                                 detector_ids=candidates),
            ))
        frame = pd.DataFrame(rows, columns=SELECTION_COLUMNS)
        target = _output_file(args, path, SELECTION_CSV, several, matrix)
        write_csv(frame, target, report_header(matrix, __version__) + [f"family={args.family}"])
        if args.plain:
            print(render_plain(frame))
        else:
            for row in rows:
                console.print(
                    f"   💡 {row['mode']} {row['constraint']:g} : {row['subset'] or '(aucun)'} "
                    f"(coût {row['cost']:.2f}, DR {row['dr']:.4f})"
                )
        console.print(f"✅ {target}")
    return 0


COMMANDS = {
    "golden": cmd_golden,
    "campaign": cmd_campaign,
    "report": cmd_report,
    "select": cmd_select,
}


def exit_code(error: BaseException) -> int:
    """Code de sortie associé à une exception."""
    if isinstance(error, MatrixFormatError):
        return 3
    if isinstance(error, (DesignDefectError, ContractViolationError, TraceInvariantError)):
        return 2
    if isinstance(error, (ConfigurationError, ValidationError, InfeasibleTargetError,
                          UndefinedMetricError)):
        return 1
    if isinstance(error, OSError):
        return 3
    raise error


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Exécute une commande.

    Args:
        argv: Arguments (sys.argv[1:] par défaut)

    Returns:
        Code de sortie
    """
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except (ConfigurationError, ValidationError, InfeasibleTargetError, UndefinedMetricError,
            DesignDefectError, ContractViolationError, TraceInvariantError,
            MatrixFormatError, OSError) as e:
        console.print(f"❌ {type(e).__name__} : {e}")
        return exit_code(e)


if __name__ == "__main__":
    sys.exit(main())
