"""
Tests pour le noyau de simulation au cycle près.
"""
import pytest

from src.designs.aes import AesStimulus, build_aes
from src.designs.stimulus import FIPS_KEY, FIPS_PLAINTEXT
from src.models.signals import BitVec, SignalClass, SignalKind, SignalRef
from src.sim.design import Design, StimulusProgram
from src.sim.kernel import (
    Trace,
    TraceRow,
    export_trace_csv,
    load_trace_csv,
    run,
    run_golden,
    snapshot,
)
from src.utils.errors import ConfigurationError, DesignDefectError, TraceInvariantError

EN = SignalRef("en", 1, SignalKind.PRIMARY_INPUT)
CNT = SignalRef("cnt", 4, SignalKind.REGISTER)
DONE = SignalRef("done", 1, SignalKind.PRIMARY_OUTPUT)


class Counter(Design):
    """Compteur 4 bits qui termine quand il atteint `limit`."""

    design_id = "counter"

    def __init__(self, limit: int = 5, claimed: int = 5):
        super().__init__([EN, CNT, DONE])
        self.limit = limit
        self.claimed = claimed

    def _reset_state(self) -> None:
        pass

    def _step(self, inputs) -> None:
        if inputs["en"]:
            self._set("cnt", self._v["cnt"] + 1)
        self._v["done"] = int(self._v["cnt"] == self.limit)

    def done(self) -> bool:
        return self._v["done"] == 1

    def outputs(self):
        return [self._v["cnt"]]

    def oracle_output(self, stimulus):
        return [self.claimed]


class Enable(StimulusProgram):
    def reset(self) -> None:
        pass

    def drive(self, cycle, design):
        return {"en": 1}


class Recorder:
    """Hook qui mémorise les cycles observés."""

    def __init__(self):
        self.cycles = []
        self.reset_seen = False

    def on_reset(self, snap):
        self.reset_seen = True

    def on_cycle(self, cycle, snap):
        self.cycles.append((cycle, snap[CNT].value))


@pytest.fixture
def aes_setup():
    """Cœur AES, détecteurs livrés et banc de test d'un bloc (vecteur FIPS-197)."""
    design, bundle = build_aes(FIPS_KEY)
    return design, bundle, AesStimulus(FIPS_KEY, [FIPS_PLAINTEXT])


def test_budget_must_be_positive():
    """Test le refus d'un budget nul."""
    with pytest.raises(ConfigurationError):
        run(Counter(), Enable(), [CNT], 0)


def test_run_until_done():
    """Test l'arrêt à done() et le contenu de la trace."""
    hook = Recorder()
    trace = run(Counter(limit=5), Enable(), [CNT], 100, hooks=[hook])

    assert trace.terminal_cycle == 5
    assert [row.cycle for row in trace.rows] == [1, 2, 3, 4, 5]
    assert trace.column(CNT) == [1, 2, 3, 4, 5]
    assert trace.reset_values == (0,)
    assert hook.reset_seen
    assert hook.cycles == [(c, c) for c in range(1, 6)]


def test_budget_exhaustion():
    """Test qu'un circuit bloqué s'arrête au budget sans cycle terminal."""
    trace = run(Counter(limit=20), Enable(), [CNT], 30)

    assert trace.terminal_cycle is None
    assert len(trace.rows) == 30


def test_unknown_watched_signal():
    """Test le refus d'un signal observé inconnu ou incompatible."""
    with pytest.raises(ConfigurationError):
        run(Counter(), Enable(), [SignalRef("ghost", 1, SignalKind.WIRE)], 10)
    with pytest.raises(ConfigurationError):
        run(Counter(), Enable(), [SignalRef("cnt", 8, SignalKind.REGISTER)], 10)


def test_step_action_runs_before_each_step():
    """Test que l'action voit le nombre de pas déjà exécutés."""

    class SkipAhead:
        def before_step(self, steps_done, design):
            if steps_done == 2:
                design.flip_register_bit("cnt", 2)

    trace = run(Counter(limit=7), Enable(), [CNT], 100, action=SkipAhead())

    assert trace.column(CNT)[:3] == [1, 2, 7]
    assert trace.terminal_cycle == 3


def test_record_false_keeps_terminal_cycle():
    """Test qu'une exécution sans enregistrement renseigne le cycle terminal."""
    trace = run(Counter(limit=5), Enable(), [CNT], 100, record=False)

    assert trace.rows == []
    assert trace.terminal_cycle == 5


def test_golden_run_matches_oracle(aes_setup):
    """Test le run de référence AES sur le vecteur connu."""
    design, _, stimulus = aes_setup

    golden = run_golden(design, stimulus, [])
    assert golden.outputs == [(0, 0x69C4E0D86A7B0430D8CDB78070B4C55A)]
    assert golden.cycles == golden.trace.terminal_cycle

    again = run(design, stimulus, [], 10 * golden.cycles)
    assert again.terminal_cycle == golden.cycles


def test_golden_run_oracle_mismatch():
    """Test qu'une divergence avec l'oracle est un défaut du modèle."""
    with pytest.raises(DesignDefectError):
        run_golden(Counter(limit=5, claimed=6), Enable(), [CNT])


def test_golden_run_never_done():
    """Test qu'un run de référence non terminé est un défaut du modèle."""
    with pytest.raises(DesignDefectError):
        run_golden(Counter(limit=20), Enable(), [CNT], max_cycles=50)


def test_determinism_and_hook_transparency(aes_setup):
    """Test que deux runs sont identiques et que les moniteurs ne changent rien."""
    design, bundle, stimulus = aes_setup
    watched = bundle.watched_signals(design)

    first = run(design, stimulus, watched, 1000)
    second = run(design, stimulus, watched, 1000, hooks=bundle.petri_monitors())

    assert first.rows == second.rows
    assert first.reset_values == second.reset_values
    assert first.terminal_cycle == second.terminal_cycle


def test_snapshot_rekeys_row():
    """Test la réindexation d'une ligne par signal."""
    trace = Trace([CNT, DONE])
    row = TraceRow(1, (3, 1))

    assert snapshot(trace, row) == {CNT: BitVec(4, 3), DONE: BitVec(1, 1)}
    assert snapshot(Trace([]), TraceRow(1, ())) == {}
    with pytest.raises(TraceInvariantError):
        snapshot(trace, TraceRow(1, (3,)))


def test_trace_invariants():
    """Test les invariants de construction de trace."""
    trace = Trace([CNT])
    trace.append(1, (1,))

    with pytest.raises(TraceInvariantError):
        trace.append(2, (1, 2))
    with pytest.raises(TraceInvariantError):
        trace.append(1, (2,))


def test_trace_csv_round_trip(tmp_path):
    """Test l'export puis la relecture d'une trace."""
    trace = run(Counter(limit=12), Enable(), [CNT, DONE], 100)

    path = export_trace_csv(trace, tmp_path / "trace.csv", ["seed=7"])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "# seed=7"
    assert lines[2] == "cycle,cnt,done"
    assert lines[-1] == "12,c,1"

    loaded = load_trace_csv(path, [CNT, DONE])
    assert loaded.rows == trace.rows
    assert loaded.reset_values == trace.reset_values


def test_trace_csv_errors(tmp_path):
    """Test les erreurs de relecture de trace."""
    trace = run(Counter(limit=3), Enable(), [CNT], 100)
    path = export_trace_csv(trace, tmp_path / "trace.csv")

    with pytest.raises(TraceInvariantError):
        load_trace_csv(path, [DONE])
    with pytest.raises(FileNotFoundError):
        load_trace_csv(tmp_path / "absent.csv", [CNT])
