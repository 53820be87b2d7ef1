"""
Run de référence : simulation sans faute, apprentissage des tables de séquences,
validation du silence des détecteurs et artefacts écrits sur disque.
"""
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from rich.console import Console

from src import __version__
from src.campaign.fault_engine import CampaignContext, GoldenReference
from src.designs.registry import DesignSetup, load_setup, oracle_output
from src.models.schemas import GoldenRecord
from src.models.signals import SignalRef
from src.monitors.bundle import MonitorBundle
from src.monitors.petri import PetriBinding
from src.monitors.petri_io import load_petri, save_petri
from src.monitors.sequence import BitSelector, SequenceTable, learn_all
from src.monitors.sequence_io import load_table, save_table
from src.sim.design import Design
from src.sim.kernel import GoldenRun, Trace, export_trace_csv, load_trace_csv, run_golden
from src.utils.config import CampaignConfig
from src.utils.errors import ConfigurationError, DesignDefectError

console = Console(stderr=True)

GOLDEN_JSON = "golden.json"
GOLDEN_TRACE = "golden_trace.csv"
TABLES_DIR = "tables"
NETS_DIR = "nets"


@dataclass
class GoldenArtifacts:
    """Résultat de la commande golden."""

    run: GoldenRun
    record: GoldenRecord
    bindings: List[PetriBinding]
    selectors: List[BitSelector]
    tables: Dict[str, SequenceTable]
    comments: List[str] = field(default_factory=list)


def header_lines(config: CampaignConfig) -> List[str]:
    """Lignes d'en-tête communes à tous les fichiers produits."""
    return [
        f"tool_version={__version__}",
        f"config_digest={config.digest}",
        f"seed={config.campaign.seed}",
    ]


def select_bindings(bundle: MonitorBundle, design: Design, config: CampaignConfig
                    ) -> List[PetriBinding]:
    """
    Réseaux retenus : réseaux livrés filtrés par [monitors].nets puis fichiers .pn.

    Raises:
        ConfigurationError: Nom de réseau inconnu ou événement incompatible avec le circuit
    """
    wanted = config.monitors.nets
    if wanted is None:
        bindings = list(bundle.nets)
    else:
        known = {b.name: b for b in bundle.nets}
        unknown = [n for n in wanted if n not in known]
        if unknown:
            raise ConfigurationError(
                f"Réseaux inconnus pour {bundle.design_id} : {', '.join(unknown)}"
            )
        bindings = [known[n] for n in wanted]
    bindings += [load_petri(path) for path in config.monitors.net_files]
    MonitorBundle(bundle.design_id, bindings).validate(design)
    return bindings


def watched_signals(bundle: MonitorBundle, design: Design, bindings: Sequence[PetriBinding],
                    presets) -> List[SignalRef]:
    """Signaux enregistrés dans la trace de référence."""
    seen: Dict[str, SignalRef] = {}
    for binding in bindings:
        for ev in binding.events:
            seen.setdefault(ev.signal.path, ev.signal)
    for sig in bundle.selector_candidates(design, presets):
        seen.setdefault(sig.path, sig)
    return list(seen.values())


def replay(trace: Trace, monitors: Sequence) -> List[str]:
    """
    Rejoue une trace dans des moniteurs.

    Returns:
        Identifiants des moniteurs ayant levé une faute
    """
    reset = trace.reset_snapshot()
    for monitor in monitors:
        monitor.on_reset(reset)
    for cycle, snap in trace.snapshots():
        for monitor in monitors:
            monitor.on_cycle(cycle, snap)
    flagged = []
    for monitor in monitors:
        if monitor.finalize():
            flagged.append(monitor.detector_id)
    return flagged


def _tables(config: CampaignConfig, trace: Trace, selectors: List[BitSelector]
            ) -> Dict[str, SequenceTable]:
    tables = learn_all(trace, selectors)
    names = {sel.name for sel in selectors}
    for path in config.monitors.table_files:
        name = Path(path).stem
        if name not in names:
            raise ConfigurationError(f"{path} : aucun sélecteur nommé {name}")
        tables[name] = load_table(path)
        console.print(f"⚠️  Table {name} reprise de {path} (non réapprise)")
    return tables


def golden(config: CampaignConfig, setup: Optional[DesignSetup] = None) -> GoldenArtifacts:
    """
    Exécute le run de référence et prépare les détecteurs.

    Args:
        config: Configuration de campagne
        setup: Circuit, détecteurs et banc de test déjà construits (sinon chargés)

    Returns:
        Artefacts à écrire

    Raises:
        DesignDefectError: Sortie différente de l'oracle ou détecteur non silencieux
        ConfigurationError: Réseau ou préréglage inconnu
    """
    setup = setup or load_setup(config)
    design, bundle = setup.design, setup.bundle
    presets = config.monitors.presets
    bindings = select_bindings(bundle, design, config)
    watched = watched_signals(bundle, design, bindings, presets)

    console.print(f"🔧 Run de référence {design.design_id} ({len(watched)} signaux observés)")
    run = run_golden(design, setup.stimulus, watched)
    selectors = bundle.selectors(design, run.trace, presets)
    tables = _tables(config, run.trace, selectors)

    monitors = MonitorBundle(bundle.design_id, bindings, check_end=bundle.check_end)
    flagged = replay(
        run.trace, monitors.petri_monitors() + monitors.sequence_monitors(selectors, tables)
    )
    if flagged:
        raise DesignDefectError(
            f"{design.design_id} : fausse détection sur le run de référence ({', '.join(flagged)})"
        )

    registers = design.control_registers()
    record = GoldenRecord(
        design=design.design_id,
        cycles=run.cycles,
        output_count=design.output_count(run.outputs),
        outputs=design.format_outputs(run.outputs),
        control_registers=len(registers),
        control_register_bits=sum(r.width for r in registers),
        nets=[b.name for b in bindings],
        tables=[sel.name for sel in selectors],
        config_digest=config.digest,
        seed=config.campaign.seed,
    )
    console.print(
        f"✅ {run.cycles} cycles, {record.output_count} sorties, "
        f"{len(bindings)} réseaux et {len(tables)} tables silencieux"
    )
    return GoldenArtifacts(run, record, bindings, selectors, tables, header_lines(config))


def write_golden(artifacts: GoldenArtifacts, out_dir: Path) -> List[Path]:
    """
    Écrit golden.json, la trace, les tables et les réseaux.

    Returns:
        Chemins écrits
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    record_path = out_dir / GOLDEN_JSON
    record_path.write_text(artifacts.record.model_dump_json(indent=2) + "\n", encoding="utf-8")
    paths.append(record_path)
    paths.append(export_trace_csv(artifacts.run.trace, out_dir / GOLDEN_TRACE, artifacts.comments))
    for name, table in sorted(artifacts.tables.items()):
        paths.append(save_table(table, out_dir / TABLES_DIR / f"{name}.seq"))
    for binding in artifacts.bindings:
        paths.append(save_petri(binding, out_dir / NETS_DIR / f"{binding.name}.pn"))
    return paths


def load_golden_record(out_dir: Path) -> GoldenRecord:
    """
    Relit golden.json.

    Raises:
        FileNotFoundError: Artefacts de référence absents (lancer la commande golden)
    """
    path = Path(out_dir) / GOLDEN_JSON
    if not path.exists():
        raise FileNotFoundError(f"Fichier introuvable : {path.absolute()}")
    return GoldenRecord.model_validate_json(path.read_text(encoding="utf-8"))


def _trace_signals(path: Path, design: Design) -> List[SignalRef]:
    if not path.exists():
        raise FileNotFoundError(f"Fichier introuvable : {path.absolute()}")
    with open(path, newline="", encoding="utf-8") as f:
        rows = csv.reader(line for line in f if not line.startswith("#"))
        header = next(rows, None) or []
    return [design.signal(p) for p in header[1:]]


def load_context(config: CampaignConfig, out_dir: Path) -> CampaignContext:
    """
    Reconstruit le contexte de campagne à partir des artefacts de la commande golden.

    Les réseaux et tables sont ceux validés sur le run de référence.

    Raises:
        FileNotFoundError: Artefact manquant
        ConfigurationError: Artefacts produits pour un autre circuit ou sélecteur
    """
    out_dir = Path(out_dir)
    record = load_golden_record(out_dir)
    setup = load_setup(config)
    design, bundle = setup.design, setup.bundle
    if record.design != design.design_id:
        raise ConfigurationError(
            f"{out_dir} contient la référence de {record.design}, pas de {design.design_id}"
        )
    if record.config_digest != config.digest:
        console.print("⚠️  Configuration modifiée depuis la commande golden")

    bindings = [load_petri(out_dir / NETS_DIR / f"{name}.pn") for name in record.nets]
    MonitorBundle(design.design_id, bindings).validate(design)
    trace_path = out_dir / GOLDEN_TRACE
    trace = load_trace_csv(trace_path, _trace_signals(trace_path, design))
    selectors = bundle.selectors(design, trace, record.tables)
    tables = {}
    for sel in selectors:
        table = load_table(out_dir / TABLES_DIR / f"{sel.name}.seq")
        if table.selector_spec and table.selector_spec != sel.spec():
            raise ConfigurationError(f"Table {sel.name} apprise pour un autre sélecteur")
        tables[sel.name] = table

    oracle = oracle_output(design.design_id, setup.stimulus)
    reference = GoldenReference(
        cycles=record.cycles, outputs=oracle, output_count=design.output_count(oracle)
    )
    if reference.output_count != record.output_count:
        raise ConfigurationError(
            f"golden.json : {record.output_count} sorties, l'oracle en produit "
            f"{reference.output_count}"
        )
    return CampaignContext(
        config=config,
        golden=reference,
        bindings=bindings,
        selectors=selectors,
        tables=tables,
        check_end=bundle.check_end,
        control_register_bits=record.control_register_bits,
    )


def build_context(artifacts: GoldenArtifacts, config: CampaignConfig,
                  check_end: bool = True) -> CampaignContext:
    """Contexte de campagne directement depuis des artefacts en mémoire."""
    return CampaignContext(
        config=config,
        golden=GoldenReference(artifacts.run.cycles, artifacts.run.outputs,
                               artifacts.record.output_count),
        bindings=list(artifacts.bindings),
        selectors=list(artifacts.selectors),
        tables=dict(artifacts.tables),
        check_end=check_end,
        control_register_bits=artifacts.record.control_register_bits,
    )
