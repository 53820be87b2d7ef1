"""
Noyau de simulation au cycle près : exécution, capture de trace et run de référence.

Le reset n'est pas une ligne de trace : la ligne k contient les valeurs post-front
après le k-ième pas d'horloge. Les hooks reçoivent `on_reset` une fois puis
`on_cycle(k, snapshot)` après chaque pas.
"""
import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterator, List, Mapping, Optional, Protocol, Sequence, Tuple

from src.models.signals import BitVec, SignalRef
from src.sim.design import Design, StimulusProgram
from src.utils.errors import ConfigurationError, DesignDefectError, TraceInvariantError


class CycleHook(Protocol):
    """Observateur en lecture seule appelé à chaque cycle (moniteurs)."""

    def on_reset(self, snap: "Snapshot") -> None:
        ...

    def on_cycle(self, cycle: int, snap: "Snapshot") -> None:
        ...


class StepAction(Protocol):
    """Action appliquée au circuit avant un pas d'horloge (injection de faute)."""

    def before_step(self, steps_done: int, design: Design) -> None:
        ...


class Snapshot(Mapping[SignalRef, BitVec]):
    """Vue en lecture seule des valeurs courantes d'un ensemble de signaux."""

    __slots__ = ("_values", "_watched", "_index")

    def __init__(self, values: Mapping[str, int], watched: Sequence[SignalRef]):
        self._values = values
        self._watched = tuple(watched)
        self._index = {s: s.path for s in self._watched}

    def __getitem__(self, sig: SignalRef) -> BitVec:
        if sig not in self._index:
            raise KeyError(sig)
        return BitVec(sig.width, self._values[sig.path])

    def __iter__(self) -> Iterator[SignalRef]:
        return iter(self._watched)

    def __len__(self) -> int:
        return len(self._watched)

    def raw(self, path: str) -> int:
        """Valeur entière d'un signal, sans construire de BitVec."""
        try:
            return self._values[path]
        except KeyError:
            raise ConfigurationError(f"Signal absent de l'instantané : {path}") from None


@dataclass(frozen=True, slots=True)
class TraceRow:
    """Valeurs post-front des signaux observés pour un cycle."""

    cycle: int
    values: Tuple[int, ...]


@dataclass
class Trace:
    """Trace cycle par cycle des signaux observés."""

    watched: List[SignalRef]
    rows: List[TraceRow] = field(default_factory=list)
    terminal_cycle: Optional[int] = None
    reset_values: Tuple[int, ...] = ()

    def append(self, cycle: int, values: Tuple[int, ...]) -> None:
        if len(values) != len(self.watched):
            raise TraceInvariantError(
                f"Cycle {cycle} : {len(values)} valeurs pour {len(self.watched)} signaux"
            )
        if self.rows and cycle <= self.rows[-1].cycle:
            raise TraceInvariantError(f"Cycle {cycle} non strictement croissant")
        self.rows.append(TraceRow(cycle, values))

    def column(self, sig: SignalRef) -> List[int]:
        """Valeurs d'un signal observé sur toute la trace."""
        idx = self.watched.index(sig)
        return [row.values[idx] for row in self.rows]

    def snapshots(self) -> Iterator[Tuple[int, Snapshot]]:
        """Rejoue la trace sous forme d'instantanés (cycle, vue)."""
        paths = [s.path for s in self.watched]
        for row in self.rows:
            yield row.cycle, Snapshot(dict(zip(paths, row.values)), self.watched)

    def reset_snapshot(self) -> Snapshot:
        paths = [s.path for s in self.watched]
        values = self.reset_values or (0,) * len(paths)
        return Snapshot(dict(zip(paths, values)), self.watched)


@dataclass
class GoldenRun:
    """Exécution de référence sans faute."""

    trace: Trace
    outputs: Any
    cycles: int

    def __post_init__(self):
        if self.trace.terminal_cycle != self.cycles:
            raise TraceInvariantError(
                f"Cycles de référence {self.cycles} != cycle terminal "
                f"{self.trace.terminal_cycle}"
            )


def _check_watched(design: Design, watched: Sequence[SignalRef]) -> None:
    for sig in watched:
        known = design.signal(sig.path)
        if known != sig:
            raise ConfigurationError(f"Signal {sig.path} incompatible avec {design.design_id}")


def run(
    design: Design,
    stimulus: StimulusProgram,
    watched: Sequence[SignalRef],
    cycle_budget: int,
    hooks: Sequence[CycleHook] = (),
    action: Optional[StepAction] = None,
    record: bool = True,
) -> Trace:
    """
    Simule un circuit depuis le reset jusqu'à `done()` ou épuisement du budget.

    Args:
        design: Circuit à simuler (remis à zéro ici)
        stimulus: Banc de test
        watched: Signaux enregistrés dans la trace
        cycle_budget: Nombre maximal de pas d'horloge
        hooks: Observateurs appelés après chaque cycle
        action: Action optionnelle exécutée avant chaque pas (injection)
        record: Si False, les lignes ne sont pas conservées (campagnes)

    Returns:
        Trace avec terminal_cycle renseigné si et seulement si done() a été atteint

    Raises:
        ConfigurationError: Budget < 1 ou signal observé inconnu
    """
    if cycle_budget < 1:
        raise ConfigurationError(f"Budget de cycles invalide : {cycle_budget}")
    _check_watched(design, watched)

    design.reset()
    stimulus.reset()
    values = design.values()
    paths = [s.path for s in watched]
    trace = Trace(list(watched), reset_values=tuple(values[p] for p in paths))

    snap = Snapshot(values, watched)
    for hook in hooks:
        hook.on_reset(snap)

    for cycle in range(1, cycle_budget + 1):
        if action is not None:
            action.before_step(cycle - 1, design)
        design.step(stimulus.drive(cycle, design))
        stimulus.settle(design)
        # la vue doit suivre un éventuel remplacement du dictionnaire interne
        values = design.values()
        if record:
            trace.append(cycle, tuple(values[p] for p in paths))
        if hooks:
            snap = Snapshot(values, watched)
            for hook in hooks:
                hook.on_cycle(cycle, snap)
        if design.done():
            trace.terminal_cycle = cycle
            break
    return trace


def run_golden(
    design: Design,
    stimulus: StimulusProgram,
    watched: Sequence[SignalRef],
    max_cycles: int = 200_000,
    hooks: Sequence[CycleHook] = (),
) -> GoldenRun:
    """
    Exécute la simulation de référence et la vérifie contre l'oracle fonctionnel.

    Raises:
        DesignDefectError: Si la simulation ne termine pas ou diverge de l'oracle
    """
    trace = run(design, stimulus, watched, max_cycles, hooks)
    if trace.terminal_cycle is None:
        raise DesignDefectError(
            f"{design.design_id} : run de référence non terminé en {max_cycles} cycles"
        )
    outputs = design.outputs()
    expected = design.oracle_output(stimulus)
    if outputs != expected:
        raise DesignDefectError(f"{design.design_id} : sorties différentes de l'oracle")
    return GoldenRun(trace=trace, outputs=outputs, cycles=trace.terminal_cycle)


def snapshot(trace: Trace, row: TraceRow) -> dict:
    """
    Réindexe les valeurs positionnelles d'une ligne par SignalRef.

    Raises:
        TraceInvariantError: Si la ligne n'a pas la largeur de la trace
    """
    if len(row.values) != len(trace.watched):
        raise TraceInvariantError(
            f"Cycle {row.cycle} : {len(row.values)} valeurs pour {len(trace.watched)} signaux"
        )
    return {sig: BitVec(sig.width, v) for sig, v in zip(trace.watched, row.values)}


def export_trace_csv(trace: Trace, path: Path, comments: Sequence[str] = ()) -> Path:
    """
    Écrit une trace en CSV (`cycle,<path>,...`, valeurs hexadécimales minuscules).

    Args:
        trace: Trace à écrire
        path: Fichier de sortie
        comments: Lignes d'en-tête écrites préfixées par `#`

    Returns:
        Chemin du fichier écrit
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    digits = [s.hex_digits() for s in trace.watched]
    with open(path, "w", newline="", encoding="utf-8") as f:
        for line in comments:
            f.write(f"# {line}\n")
        if trace.reset_values:
            reset = ",".join(format(v, f"0{d}x") for v, d in zip(trace.reset_values, digits))
            f.write(f"# reset={reset}\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["cycle"] + [s.path for s in trace.watched])
        for row in trace.rows:
            writer.writerow(
                [row.cycle] + [format(v, f"0{d}x") for v, d in zip(row.values, digits)]
            )
    return path


def load_trace_csv(path: Path, watched: Sequence[SignalRef]) -> Trace:
    """
    Relit une trace exportée par `export_trace_csv`.

    Raises:
        FileNotFoundError: Si le fichier n'existe pas
        TraceInvariantError: Si l'en-tête ne correspond pas aux signaux fournis
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Fichier introuvable : {path.absolute()}")
    with open(path, newline="", encoding="utf-8") as f:
        lines = f.readlines()
    reset: tuple = ()
    for line in lines:
        if line.startswith("# reset="):
            reset = tuple(int(v, 16) for v in line[len("# reset="):].strip().split(",") if v)
    reader = csv.reader(line for line in lines if not line.startswith("#"))
    header = next(reader, None)
    expected = ["cycle"] + [s.path for s in watched]
    if header != expected:
        raise TraceInvariantError(f"En-tête de trace inattendu dans {path}")
    trace = Trace(list(watched), reset_values=reset)
    for record in reader:
        trace.append(int(record[0]), tuple(int(v, 16) for v in record[1:]))
    return trace
