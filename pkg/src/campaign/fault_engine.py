"""
Moteur d'injection de fautes : énumération des plans Case 1 / Case 2, exécution d'une
injection, classification des sorties et orchestration de la campagne.

Chaque injection repart du reset avec une instance neuve du circuit ; les résultats
sont rangés par indice d'injection, indépendamment de l'ordre d'exécution.
"""
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from rich.console import Console
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
)

from src.analysis.area import area_model
from src.analysis.matrix import DetectionMatrix
from src.designs.registry import build_design, build_stimulus
from src.models.schemas import (
    Case1Fault,
    Case2Fault,
    DetectorInfo,
    InjectionOutcome,
    OutputClass,
)
from src.monitors.bundle import MonitorBundle
from src.monitors.petri import PetriBinding
from src.monitors.sequence import BitSelector, SequenceTable
from src.sim.design import Design, StimulusProgram
from src.sim.kernel import run
from src.utils.config import CampaignConfig, get_settings
from src.utils.errors import ConfigurationError, DesignDefectError

console = Console(stderr=True)

Fault = Union[Case1Fault, Case2Fault]


def enumerate_case1(design: Design, golden_cycles: int, injections_per_bit: int,
                    seed: int) -> List[Case1Fault]:
    """
    Plan Case 1 : basculements répartis sur tous les bits des registres de contrôle.

    Args:
        design: Circuit ciblé (registres de contrôle dans l'ordre de déclaration)
        golden_cycles: Durée du run de référence ; les cycles sont tirés dans [0, golden)
        injections_per_bit: Injections par bit
        seed: Graine du générateur Philox

    Returns:
        Liste de fautes, bit par bit, registre par registre

    Raises:
        ConfigurationError: injections_per_bit < 1, golden_cycles < 1 ou aucun registre
    """
    if injections_per_bit < 1:
        raise ConfigurationError(f"injections_per_bit doit être >= 1 (reçu {injections_per_bit})")
    if golden_cycles < 1:
        raise ConfigurationError(f"Durée de référence invalide : {golden_cycles}")
    registers = design.control_registers()
    if not registers:
        raise ConfigurationError(f"{design.design_id} : aucun registre de contrôle")

    rng = np.random.Generator(np.random.Philox(seed))
    faults = []
    for reg in registers:
        for bit in range(reg.width):
            cycles = rng.integers(0, golden_cycles, size=injections_per_bit)
            faults.extend(Case1Fault(register=reg.path, bit=bit, cycle=int(c)) for c in cycles)
    return faults


def enumerate_case2(design: Design, golden_cycles: int, injections: int, seed: int,
                    duration: int = 10) -> List[Case2Fault]:
    """
    Plan Case 2 : fenêtres de valeurs aléatoires sur les entrées primaires de contrôle.

    Les groupes d'entrées du circuit sont utilisés à tour de rôle (un seul groupe sauf
    pour le routeur).

    Raises:
        ConfigurationError: Paramètre négatif, durée nulle ou circuit sans entrée de contrôle
    """
    if injections < 0:
        raise ConfigurationError(f"Nombre d'injections négatif : {injections}")
    if duration < 1:
        raise ConfigurationError(f"Durée de fenêtre invalide : {duration}")
    if golden_cycles < 1:
        raise ConfigurationError(f"Durée de référence invalide : {golden_cycles}")
    groups = [g for g in design.case2_groups() if g]
    if not groups:
        raise ConfigurationError(f"{design.design_id} : aucune entrée primaire de contrôle")

    rng = np.random.Generator(np.random.Philox(seed))
    starts = rng.integers(0, golden_cycles, size=injections)
    return [
        Case2Fault(
            inputs=[sig.path for sig in groups[i % len(groups)]],
            start_cycle=int(start),
            duration=duration,
            seed=seed,
            index=i,
        )
        for i, start in enumerate(starts)
    ]


class BitFlip:
    """XOR d'un bit de registre après `cycle` pas d'horloge."""

    def __init__(self, fault: Case1Fault):
        self.fault = fault

    def before_step(self, steps_done: int, design: Design) -> None:
        if steps_done == self.fault.cycle:
            design.flip_register_bit(self.fault.register_path, self.fault.bit)


class InputWindow:
    """Forçage d'entrées à des valeurs aléatoires pendant `duration` pas."""

    def __init__(self, fault: Case2Fault, design: Design):
        self.fault = fault
        self.signals = [design.signal(path) for path in fault.inputs]

    def values(self, steps_done: int) -> List[int]:
        """Valeurs du pas donné, tirées d'un générateur indexé (graine, injection, pas)."""
        key = np.random.SeedSequence([self.fault.seed, self.fault.index, steps_done])
        rng = np.random.Generator(np.random.Philox(key))
        return [int(rng.integers(0, 1 << sig.width)) for sig in self.signals]

    def before_step(self, steps_done: int, design: Design) -> None:
        start = self.fault.start_cycle
        end = start + self.fault.duration
        if start <= steps_done < end:
            for sig, value in zip(self.signals, self.values(steps_done)):
                design.force_input(sig, value, True)
        elif steps_done == end:
            for sig in self.signals:
                design.force_input(sig, 0, False)


def action_for(fault: Fault, design: Design):
    if isinstance(fault, Case1Fault):
        return BitFlip(fault)
    return InputWindow(fault, design)


@dataclass(frozen=True)
class GoldenReference:
    """Ce qu'une injection doit connaître du run de référence."""

    cycles: int
    outputs: Any
    output_count: int


def classify(terminated: bool, cycles_run: int, output_count: int, record: Any,
             golden: GoldenReference) -> OutputClass:
    """
    Classe la sortie d'une exécution fautée.

    Args:
        terminated: done() atteint avant épuisement du budget
        cycles_run: Cycles simulés
        output_count: Nombre d'éléments de sortie produits
        record: Sorties produites
        golden: Référence (sortie de l'oracle, durée, nombre d'éléments)

    Returns:
        timeout, correct, premature ou sdc
    """
    if not terminated:
        return OutputClass.TIMEOUT
    if record == golden.outputs:
        return OutputClass.CORRECT
    if cycles_run < golden.cycles and output_count < golden.output_count:
        return OutputClass.PREMATURE
    return OutputClass.SDC


def run_injection(
    design_factory: Callable[[], Design],
    stimulus: StimulusProgram,
    fault: Fault,
    monitors: Sequence[Any],
    golden: GoldenReference,
    budget_multiplier: float = 2.0,
    inj_id: int = 0,
) -> InjectionOutcome:
    """
    Exécute une injection et relève la détection de chaque moniteur.

    Args:
        design_factory: Fabrique d'une instance neuve du circuit
        stimulus: Banc de test (remis à zéro par le noyau)
        fault: Faute à injecter
        monitors: Moniteurs (réinitialisés au reset, finalisés en fin d'exécution)
        golden: Référence de classification
        budget_multiplier: Budget de cycles en multiple de la durée de référence
        inj_id: Indice de l'injection

    Returns:
        Résultat classifié avec une détection par moniteur

    Raises:
        ConfigurationError: budget_multiplier < 1 ou faute incompatible avec le circuit
        DesignDefectError: Exception du modèle ou détection antérieure à la faute
    """
    if budget_multiplier < 1:
        raise ConfigurationError(f"budget_multiplier doit être >= 1 (reçu {budget_multiplier})")
    budget = math.ceil(budget_multiplier * golden.cycles)
    design = design_factory()
    action = action_for(fault, design)
    try:
        trace = run(design, stimulus, (), budget, hooks=monitors, action=action, record=False)
        record = design.outputs()
        count = design.output_count(record)
    except ConfigurationError:
        raise
    except Exception as e:
        raise DesignDefectError(
            f"{design.design_id} : {type(e).__name__} pendant l'injection {inj_id} ({e})", fault
        ) from e

    terminated = trace.terminal_cycle is not None
    cycles_run = trace.terminal_cycle if terminated else budget
    detections = []
    for monitor in monitors:
        monitor.finalize()
        det = monitor.detection()
        if det.detected and not det.via_final and det.detect_cycle < fault.reference_cycle:
            raise DesignDefectError(
                f"{monitor.detector_id} : détection au cycle {det.detect_cycle} "
                f"avant la faute", fault
            )
        detections.append(det)

    return InjectionOutcome(
        inj_id=inj_id,
        fault=fault,
        output_class=classify(terminated, cycles_run, count, record, golden),
        cycles_run=cycles_run,
        detections=detections,
    )


@dataclass
class CampaignContext:
    """
    Tout ce qu'un processus de simulation doit recevoir pour exécuter des injections.

    L'objet est sérialisable (pickle) : les circuits, bancs de test et moniteurs sont
    reconstruits dans chaque processus.
    """

    config: CampaignConfig
    golden: GoldenReference
    bindings: List[PetriBinding]
    selectors: List[BitSelector]
    tables: Dict[str, SequenceTable]
    check_end: bool = True
    control_register_bits: int = 0

    @property
    def design_id(self) -> str:
        return self.config.campaign.design

    def new_design(self) -> Design:
        return build_design(self.design_id, self.config)[0]

    def monitors(self) -> List[Any]:
        bundle = MonitorBundle(self.design_id, list(self.bindings), check_end=self.check_end)
        return bundle.petri_monitors() + bundle.sequence_monitors(self.selectors, self.tables)

    def detectors(self) -> List[DetectorInfo]:
        """Colonnes de la matrice : réseaux puis sélecteurs, avec leur coût."""
        area = self.config.area
        infos = [DetectorInfo(detector_id=b.name, kind="petri", cost=area_model(b, area))
                 for b in self.bindings]
        infos += [
            DetectorInfo(detector_id=sel.name, kind="sequence",
                         cost=area_model(self.tables[sel.name], area))
            for sel in self.selectors
        ]
        return infos

    def faults(self, design: Optional[Design] = None) -> List[Fault]:
        """Plan d'injection décrit par la section [campaign]."""
        section = self.config.campaign
        design = design or self.new_design()
        if section.case == 1:
            return enumerate_case1(design, self.golden.cycles, section.injections_per_bit,
                                   section.seed)
        return enumerate_case2(design, self.golden.cycles, section.injections, section.seed,
                               section.duration)


_WORKER: Dict[str, Any] = {}


def _init_worker(context: CampaignContext) -> None:
    _WORKER["context"] = context
    _WORKER["stimulus"] = build_stimulus(context.config)
    _WORKER["monitors"] = context.monitors()


def _run_one(job: Tuple[int, Fault]) -> InjectionOutcome:
    inj_id, fault = job
    context = _WORKER["context"]
    return run_injection(
        context.new_design,
        _WORKER["stimulus"],
        fault,
        _WORKER["monitors"],
        context.golden,
        context.config.campaign.budget_multiplier,
        inj_id,
    )


def _progress(enabled: bool) -> Progress:
    return Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        disable=not enabled,
        transient=False,
    )


def execute(context: CampaignContext, faults: Sequence[Fault], workers: int = 1,
            show_progress: bool = True) -> List[InjectionOutcome]:
    """
    Exécute une liste de fautes, en série ou dans un pool de processus.

    Returns:
        Résultats rangés par indice d'injection

    Raises:
        ConfigurationError: workers < 1
        DesignDefectError: Première injection en défaut (avec sa faute)
    """
    if workers < 1:
        raise ConfigurationError(f"Nombre de processus invalide : {workers}")
    jobs = list(enumerate(faults))
    outcomes: List[Optional[InjectionOutcome]] = [None] * len(jobs)
    label = f"{context.design_id} Case {context.config.campaign.case}"

    with _progress(show_progress and bool(jobs)) as progress:
        task = progress.add_task(label, total=len(jobs))
        if workers == 1 or len(jobs) < 2:
            _init_worker(context)
            for job in jobs:
                outcomes[job[0]] = _run_one(job)
                progress.advance(task)
        else:
            chunksize = max(1, len(jobs) // (workers * 16))
            pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                       initargs=(context,))
            try:
                for outcome in pool.map(_run_one, jobs, chunksize=chunksize):
                    outcomes[outcome.inj_id] = outcome
                    progress.advance(task)
            except BaseException:
                pool.shutdown(wait=False, cancel_futures=True)
                raise
            pool.shutdown()
    return outcomes


def campaign(context: CampaignContext, workers: Optional[int] = None,
             show_progress: Optional[bool] = None) -> DetectionMatrix:
    """
    Exécute le plan de la configuration et assemble la matrice de détection.

    Args:
        context: Contexte de campagne (référence, détecteurs, tables)
        workers: Processus de simulation (option, puis configuration, puis réglages)
        show_progress: Barre de progression sur la sortie d'erreur

    Returns:
        Matrice avec une ligne par injection, identique quel que soit `workers`
    """
    settings = get_settings()
    section = context.config.campaign
    if workers is None:
        workers = section.workers or settings.default_workers
    if show_progress is None:
        show_progress = settings.show_progress

    faults = context.faults()
    console.print(
        f"🔧 {len(faults)} injections Case {section.case} sur {context.design_id} "
        f"({len(context.bindings)} réseaux, {len(context.selectors)} sélecteurs, "
        f"{workers} processus)"
    )
    rows = execute(context, faults, workers, show_progress)
    matrix = DetectionMatrix(
        design=context.design_id,
        case=section.case,
        golden_cycles=context.golden.cycles,
        control_register_bits=context.control_register_bits,
        detectors=context.detectors(),
        rows=rows,
        config_digest=context.config.digest,
        seed=section.seed,
    )
    n_oe = int(matrix.error_mask().sum())
    console.print(f"✅ Campagne terminée : {len(rows)} injections, {n_oe} erreurs de sortie")
    return matrix
