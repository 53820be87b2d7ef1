"""
Tests pour les réseaux de Petri et le moniteur de franchissement.
"""
import itertools
import random

import pytest

from src.analysis.area import AreaModel, area_model
from src.campaign.fault_engine import action_for, enumerate_case1, enumerate_case2
from src.campaign.golden import replay, watched_signals
from src.designs.registry import build_design, build_stimulus
from src.models.signals import SignalClass, SignalKind, SignalRef
from src.monitors.petri import (
    EventSpec,
    Marking,
    PetriBinding,
    PetriMonitor,
    PetriNet,
    fire,
    is_enabled,
    reachable_markings,
)
from src.monitors.petri_io import load_petri, parse_petri, save_petri, serialize_petri
from src.sim.kernel import Snapshot, run, run_golden
from src.utils.config import load_campaign_config
from src.utils.errors import ConfigurationError, ContractViolationError
from tests.conftest import write_config

CTRL = SignalRef("fsm/state", 2, SignalKind.REGISTER, SignalClass.CONTROL)


@pytest.fixture
def two_place_net():
    """Réseau à deux places : P1 -T1-> P2 -T2-> P1, transition finale T2."""
    return PetriNet.build(
        "two_place",
        [("P1", "T1", "P2"), ("P2", "T2", "P1")],
        {"P1": 1},
        expected_final="T2",
    )


@pytest.fixture
def fsm_monitor(two_place_net):
    """Moniteur lié à fsm/state : 1 tire T1, 2 tire T2."""
    events = [
        EventSpec(CTRL, 2, "T1", target=1),
        EventSpec(CTRL, 2, "T2", target=2),
    ]
    return PetriMonitor(two_place_net, events)


def feed(monitor, values):
    """Réinitialise le moniteur (valeur 0 au reset) puis lui présente une valeur par cycle."""
    monitor.on_reset(Snapshot({CTRL.path: 0}, [CTRL]))
    for cycle, value in enumerate(values, start=1):
        monitor.on_cycle(cycle, Snapshot({CTRL.path: value}, [CTRL]))
    monitor.finalize()
    return monitor.detection()


def test_enabled_and_fire():
    """Test le franchissement élémentaire d'un réseau à une transition."""
    net = PetriNet.build("single", [("P1", "T1", "P2")], {"P1": 1})

    assert is_enabled(net, net.m0, "T1")
    after = fire(net, net.m0, "T1")
    assert after == {"P1": 0, "P2": 1}
    assert net.m0 == {"P1": 1, "P2": 0}
    assert not is_enabled(net, after, "T1")


def test_fire_disabled_transition_raises():
    """Test qu'un tir non franchissable est une violation de contrat."""
    net = PetriNet.build("single", [("P1", "T1", "P2")], {"P1": 0})

    with pytest.raises(ContractViolationError):
        fire(net, net.m0, "T1")


def test_unknown_transition_raises(two_place_net):
    """Test le rejet d'une transition inconnue."""
    with pytest.raises(ConfigurationError):
        is_enabled(two_place_net, two_place_net.m0, "T9")


def test_self_loop_keeps_token():
    """Test qu'une place à la fois en entrée et en sortie garde son jeton."""
    net = PetriNet("loop", ("P",), ("T",), (("P", "T"), ("T", "P")), Marking({"P": 1}))

    assert fire(net, net.m0, "T") == {"P": 1}


def test_join_needs_every_input_place():
    """Test qu'une transition à deux entrées exige un jeton dans chacune."""
    net = PetriNet(
        "join", ("A", "B", "C"), ("T",),
        (("A", "T"), ("B", "T"), ("T", "C")),
        Marking({"A": 1, "B": 0, "C": 0}),
    )

    for a, b, c in itertools.product(range(3), repeat=3):
        marking = {"A": a, "B": b, "C": c}
        assert is_enabled(net, marking, "T") == (a >= 1 and b >= 1)


def test_token_conservation_on_random_nets():
    """Test que chaque tir change le total de jetons de (sorties - entrées)."""
    rng = random.Random(3)
    places = ["P0", "P1", "P2", "P3"]
    for trial in range(30):
        arcs = []
        transitions = [f"T{i}" for i in range(3)]
        for t in transitions:
            for p in rng.sample(places, rng.randint(1, 2)):
                arcs.append((p, t))
            for p in rng.sample(places, rng.randint(1, 2)):
                arcs.append((t, p))
        m0 = Marking({p: rng.randint(0, 2) for p in places})
        net = PetriNet(f"random{trial}", tuple(places), tuple(transitions), tuple(arcs), m0)
        marking = net.m0
        for _ in range(10):
            enabled = [t for t in transitions if is_enabled(net, marking, t)]
            if not enabled:
                break
            t = rng.choice(enabled)
            after = fire(net, marking, t)
            assert after.total() - marking.total() == len(net.post[t]) - len(net.pre[t])
            marking = after


def random_net(rng, name):
    """Réseau aléatoire : au plus 6 places, 6 transitions et 2 jetons initiaux par place."""
    places = [f"P{i}" for i in range(rng.randint(1, 6))]
    transitions = [f"T{i}" for i in range(rng.randint(1, 6))]
    arcs = []
    for t in transitions:
        arcs += [(p, t) for p in rng.sample(places, rng.randint(1, min(2, len(places))))]
        arcs += [(t, p) for p in rng.sample(places, rng.randint(1, min(2, len(places))))]
    m0 = Marking({p: rng.randint(0, 2) for p in places})
    return PetriNet(name, tuple(places), tuple(transitions), tuple(arcs), m0)


def incidence(net):
    """Vecteurs d'entrée et de sortie de chaque transition, dans l'ordre des places."""
    pre = {t: [0] * len(net.places) for t in net.transitions}
    post = {t: [0] * len(net.places) for t in net.transitions}
    for src, dst in net.arcs:
        if src in pre:
            post[src][net.places.index(dst)] += 1
        else:
            pre[dst][net.places.index(src)] += 1
    return pre, post


def test_semantics_match_marking_graph_enumeration():
    """Test is_enabled / fire contre un graphe des marquages calculé sur des vecteurs."""
    rng = random.Random(41)
    cap = 300
    for trial in range(200):
        net = random_net(rng, f"random{trial}")
        pre, post = incidence(net)
        start = tuple(net.m0[p] for p in net.places)
        seen = {start}
        queue = [start]
        while queue:
            vec = queue.pop()
            marking = Marking(dict(zip(net.places, vec)))
            for t in net.transitions:
                enabled = all(v >= w for v, w in zip(vec, pre[t]))
                assert is_enabled(net, marking, t) == enabled
                if not enabled:
                    continue
                nxt = tuple(v - a + b for v, a, b in zip(vec, pre[t], post[t]))
                assert fire(net, marking, t) == dict(zip(net.places, nxt))
                if nxt not in seen and len(seen) < cap:
                    seen.add(nxt)
                    queue.append(nxt)
        if len(seen) < cap:
            reached = reachable_markings(net, limit=cap)
            assert {tuple(m[p] for p in net.places) for m in reached} == seen


def test_invalid_nets_rejected():
    """Test la validation de la structure des réseaux."""
    with pytest.raises(ConfigurationError):
        PetriNet("bad", ("P",), ("T",), (("P", "T"),), Marking({"P": 1}))
    with pytest.raises(ConfigurationError):
        PetriNet("bad", ("P", "Q"), ("T",), (("P", "Q"),), Marking({"P": 1, "Q": 0}))
    with pytest.raises(ConfigurationError):
        Marking({"P": -1})


def test_unbounded_net_hits_limit():
    """Test l'arrêt de l'énumération sur un réseau non borné."""
    net = PetriNet(
        "pump", ("P", "Q"), ("T",), (("P", "T"), ("T", "P"), ("T", "Q")),
        Marking({"P": 1, "Q": 0}),
    )

    with pytest.raises(ConfigurationError):
        reachable_markings(net, limit=50)


def test_bundled_style_net_is_safe(two_place_net):
    """Test qu'un cycle à un jeton n'atteint que deux marquages."""
    assert len(reachable_markings(two_place_net)) == 2


def test_monitor_accepts_normal_sequence(fsm_monitor):
    """Test l'absence de faute sur la séquence attendue."""
    det = feed(fsm_monitor, [0, 1, 1, 2, 0])

    assert not det.detected
    assert fsm_monitor.state.last_fired == "T2"


def test_monitor_flags_abnormal_firing(fsm_monitor):
    """Test la détection d'un tir non franchissable au cycle exact."""
    det = feed(fsm_monitor, [0, 0, 2, 1, 2])

    assert det.detected
    assert det.detect_cycle == 3
    assert not det.via_final


def test_monitor_fault_is_latched(fsm_monitor):
    """Test que le premier cycle de faute est conservé."""
    det = feed(fsm_monitor, [2, 0, 2, 0, 2])

    assert det.detect_cycle == 1


def test_monitor_final_check(fsm_monitor):
    """Test la détection par contrôle de la transition finale."""
    det = feed(fsm_monitor, [1])

    assert det.detected
    assert det.via_final
    assert det.detect_cycle is None


def test_monitor_final_check_without_firing(fsm_monitor):
    """Test le contrôle final quand aucune transition n'a été tirée."""
    det = feed(fsm_monitor, [0, 0, 0])

    assert det.detected and det.via_final


def test_no_final_transition_never_adds_fault():
    """Test qu'un réseau sans transition finale ne détecte rien en fin de simulation."""
    net = PetriNet.build("router_like", [("P1", "T1", "P2"), ("P2", "T2", "P1")], {"P1": 1})
    monitor = PetriMonitor(net, [EventSpec(CTRL, 2, "T1", target=1),
                                 EventSpec(CTRL, 2, "T2", target=2)])

    assert not feed(monitor, [1]).detected


def test_counter_event_type4():
    """Test l'événement à compteur : seul le 3e passage à la cible tire la transition."""
    net = PetriNet.build("count", [("A", "T1", "B")], {"A": 1}, expected_final="T1")
    monitor = PetriMonitor(net, [EventSpec(CTRL, 4, "T1", target=1, index=3)])

    monitor.on_reset(Snapshot({CTRL.path: 0}, [CTRL]))
    for cycle, value in enumerate([1, 0, 1, 0], start=1):
        monitor.on_cycle(cycle, Snapshot({CTRL.path: value}, [CTRL]))
    assert monitor.state.last_fired is None
    assert monitor.state.change_counters == [2]

    monitor.on_cycle(5, Snapshot({CTRL.path: 1}, [CTRL]))
    assert monitor.state.last_fired == "T1"
    monitor.finalize()
    assert not monitor.detection().detected


def test_counter_event_type3():
    """Test l'événement de type 3 : N-ième changement quelconque."""
    net = PetriNet.build("count", [("A", "T1", "B")], {"A": 1})
    monitor = PetriMonitor(net, [EventSpec(CTRL, 3, "T1", index=2)])

    monitor.on_reset(Snapshot({CTRL.path: 0}, [CTRL]))
    monitor.on_cycle(1, Snapshot({CTRL.path: 3}, [CTRL]))
    assert monitor.state.last_fired is None
    monitor.on_cycle(2, Snapshot({CTRL.path: 3}, [CTRL]))
    monitor.on_cycle(3, Snapshot({CTRL.path: 2}, [CTRL]))
    assert monitor.state.last_fired == "T1"


def test_event_validation():
    """Test le rejet d'événements incomplets."""
    with pytest.raises(ConfigurationError):
        EventSpec(CTRL, 2, "T1")
    with pytest.raises(ConfigurationError):
        EventSpec(CTRL, 3, "T1")
    with pytest.raises(ConfigurationError):
        EventSpec(CTRL, 2, "T1", target=4)
    with pytest.raises(ConfigurationError):
        EventSpec(CTRL, 5, "T1")


def test_area_of_single_transition_net():
    """Test le coût d'un réseau à deux places et un événement de type 2 (4 unités)."""
    net = PetriNet.build("fig", [("P1", "T1", "P2")], {"P1": 1})
    binding = PetriBinding(net, (EventSpec(CTRL, 2, "T1", target=1),))

    assert area_model(binding) == pytest.approx(4.0)


def test_area_counter_events_and_coefficients():
    """Test le coût des événements à compteur et des coefficients configurés."""
    net = PetriNet.build("fig", [("P1", "T1", "P2")], {"P1": 1})
    binding = PetriBinding(net, (EventSpec(CTRL, 3, "T1", index=2),))

    assert area_model(binding) == pytest.approx(2 + 1 + 3)
    assert area_model(binding, AreaModel(a=0.5, b=2.0, counter_event=1.0)) == pytest.approx(4.0)


def test_area_unbound_net_raises():
    """Test qu'un réseau sans événement n'a pas de coût."""
    net = PetriNet.build("fig", [("P1", "T1", "P2")], {"P1": 1})

    with pytest.raises(ConfigurationError):
        area_model(PetriBinding(net, ()))


def test_area_negative_coefficient_rejected():
    """Test le rejet des coefficients négatifs."""
    with pytest.raises(ValueError):
        AreaModel(a=-1)


def test_petri_file_round_trip(tmp_path, two_place_net):
    """Test l'écriture puis la relecture d'un fichier .pn."""
    binding = PetriBinding(two_place_net, (
        EventSpec(CTRL, 2, "T1", target=1),
        EventSpec(CTRL, 4, "T2", target=2, index=3),
    ))

    path = save_petri(binding, tmp_path / "nets" / "two_place.pn")
    loaded = load_petri(path)

    assert loaded == binding
    assert serialize_petri(loaded) == path.read_text(encoding="utf-8")


def test_petri_file_errors(tmp_path):
    """Test les erreurs de lecture des fichiers .pn."""
    with pytest.raises(FileNotFoundError):
        load_petri(tmp_path / "absent.pn")
    with pytest.raises(ConfigurationError, match="Ligne 2"):
        parse_petri("net x\nbogus 1\n")
    with pytest.raises(ConfigurationError):
        parse_petri("places P1\n")


def test_online_and_offline_evaluation_agree(tmp_path):
    """Test que les moniteurs en ligne et le rejeu de la trace fautée lèvent les mêmes fautes."""
    config = load_campaign_config(write_config(tmp_path, "aes"))
    stimulus = build_stimulus(config)
    design, bundle = build_design("aes", config)
    watched = watched_signals(bundle, design, bundle.nets, [])
    reference = run_golden(design, stimulus, watched)
    faults = enumerate_case1(design, reference.cycles, 3, seed=5)
    faults += enumerate_case2(design, reference.cycles, 10, seed=5, duration=10)

    flagged_total = 0
    for fault in faults:
        design = build_design("aes", config)[0]
        online = [b.monitor() for b in bundle.nets]
        trace = run(design, stimulus, watched, 2 * reference.cycles, hooks=online,
                    action=action_for(fault, design))
        online_flags = [m.detector_id for m in online if m.finalize()]
        offline = [b.monitor() for b in bundle.nets]

        assert replay(trace, offline) == online_flags
        assert [m.detection() for m in offline] == [m.detection() for m in online]
        flagged_total += len(online_flags)
    assert flagged_total > 0
