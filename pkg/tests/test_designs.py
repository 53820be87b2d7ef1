"""
Tests pour les circuits de référence, leurs oracles et leurs détecteurs livrés.
"""
import numpy as np
import pytest

from src.campaign.golden import golden
from src.designs.aes import AesStimulus
from src.designs.aes_reference import encrypt_int
from src.designs.conv import CHANNELS, IN_SIZE, OUT_SIZE, TAPS, ConvStimulus, build_conv, conv_oracle
from src.designs.gaus import HEIGHT, WIDTH, GausStimulus, blur_reference, build_gaus
from src.designs.registry import REFERENCE_SCALE, build_design, build_stimulus, oracle_output
from src.designs.router import NocScenario, NocStimulus
from src.designs.stimulus import FIPS_KEY, FIPS_PLAINTEXT
from src.sim.kernel import run_golden
from src.utils.config import load_campaign_config
from src.utils.errors import ConfigurationError
from tests.conftest import write_config

NET_COUNTS = {"conv": 14, "gaus": 3, "aes": 7, "router": 14}
CONTROL_BITS = {"conv": 37, "gaus": 36, "aes": 9, "router": 200}


@pytest.mark.parametrize("design_id, count", sorted(NET_COUNTS.items()))
def test_bundle_net_count(design_id, count):
    """Test le nombre de réseaux livrés par circuit."""
    design, bundle = build_design(design_id)

    assert len(bundle.nets) == count
    assert len({b.name for b in bundle.nets}) == count
    bundle.validate(design)


@pytest.mark.parametrize("design_id", ["conv", "gaus", "aes"])
def test_final_transition_declared(design_id):
    """Test que chaque réseau des circuits à fin de traitement a une transition finale."""
    _, bundle = build_design(design_id)

    assert all(b.net.expected_final is not None for b in bundle.nets)
    assert bundle.check_end


def test_router_has_no_final_transition():
    """Test que les réseaux du routeur n'ont pas de contrôle final."""
    _, bundle = build_design("router")

    assert all(b.net.expected_final is None for b in bundle.nets)
    assert not bundle.check_end


@pytest.mark.parametrize("design_id, bits", sorted(CONTROL_BITS.items()))
def test_control_register_bits(design_id, bits):
    """Test le nombre total de bits des registres de contrôle."""
    design, _ = build_design(design_id)

    assert sum(r.width for r in design.control_registers()) == bits


def test_unknown_design():
    """Test le refus d'un identifiant de circuit inconnu."""
    with pytest.raises(ConfigurationError):
        build_design("fft")


def test_reference_scale_covers_designs():
    """Test que l'échelle d'origine est connue pour chaque circuit."""
    assert set(REFERENCE_SCALE) == {"conv", "gaus", "aes", "router"}


@pytest.mark.parametrize("design_id", ["conv", "gaus", "aes", "router"])
def test_golden_run_is_silent(tmp_path, design_id):
    """Test que le run de référence égale l'oracle et qu'aucun détecteur ne se déclenche."""
    config = load_campaign_config(write_config(tmp_path, design_id))

    artifacts = golden(config)

    record = artifacts.record
    assert record.design == design_id
    assert record.cycles == artifacts.run.cycles
    assert record.nets == [b.name for b in artifacts.bindings]
    assert len(record.nets) == NET_COUNTS[design_id]
    assert set(record.tables) == set(artifacts.tables)
    assert all(name.startswith("seq_L") for name in record.tables)
    assert record.output_count == len(record.outputs)


def test_golden_run_is_deterministic(tmp_path):
    """Test que deux runs de référence donnent le même résumé."""
    config = load_campaign_config(write_config(tmp_path, "aes"))

    first = golden(config)
    second = golden(config)

    assert first.record == second.record
    assert first.run.trace.rows == second.run.trace.rows
    assert first.tables == second.tables


def test_aes_known_answer():
    """Test le chiffrement du vecteur FIPS-197 par le modèle au cycle près."""
    design, _ = build_design("aes")

    stimulus = AesStimulus(FIPS_KEY, [FIPS_PLAINTEXT])
    run = run_golden(design, stimulus, [])

    assert encrypt_int(FIPS_KEY, FIPS_PLAINTEXT) == 0x69C4E0D86A7B0430D8CDB78070B4C55A
    assert run.outputs == oracle_output("aes", stimulus)


def test_conv_zero_case():
    """Test que des activations et poids nuls donnent des cartes nulles."""
    zeros_a = [[0] * IN_SIZE for _ in range(IN_SIZE)]
    zeros_w = [[0] * TAPS for _ in range(CHANNELS)]
    stimulus = ConvStimulus(zeros_a, zeros_w, 1)
    design, _ = build_conv()

    run = run_golden(design, stimulus, [])

    assert run.outputs == [0] * (CHANNELS * OUT_SIZE * OUT_SIZE)
    assert conv_oracle(zeros_a, zeros_w) == run.outputs


def test_conv_oracle_without_relu():
    """Test l'oracle de convolution sur un noyau identité, ReLU désactivée."""
    activations = [[(r * IN_SIZE + c) % 7 - 3 for c in range(IN_SIZE)] for r in range(IN_SIZE)]
    identity = [0, 0, 0, 0, 1, 0, 0, 0, 0]
    weights = [identity] + [[0] * TAPS for _ in range(CHANNELS - 1)]

    out = conv_oracle(activations, weights, relu=0)

    expected = np.asarray(activations)[1:-1, 1:-1].reshape(-1) & ((1 << 20) - 1)
    assert out[:OUT_SIZE * OUT_SIZE] == [int(v) for v in expected]


def test_gaus_constant_image():
    """Test qu'une image constante reste constante après le flou."""
    image = [[90] * WIDTH for _ in range(HEIGHT)]
    design, _ = build_gaus()

    run = run_golden(design, GausStimulus(image), [])

    assert (blur_reference(image) == 90).all()
    assert [beat[0] for beat in run.outputs] == [90] * (WIDTH * HEIGHT)


def test_gaus_frame_memory_fits_line_buffers():
    """Test que la mémoire d'image reste hors du Case 1 et tient dans deux files de lignes."""
    image = [[(7 * y + 3 * x) % 256 for x in range(WIDTH)] for y in range(HEIGHT)]
    design, _ = build_gaus()
    registers = design.control_registers()

    assert sorted(s.path for s in registers) == sorted([
        "recv/state", "recv/x", "recv/y", "core/state", "core/x", "core/y",
        "send/state", "send/x", "send/y", "fifo/wptr", "fifo/rptr",
    ])
    assert sum(s.width for s in registers) == CONTROL_BITS["gaus"]

    run = run_golden(design, GausStimulus(image), registers)
    col = {path: run.trace.column(design.signal(path))
           for path in ("recv/state", "recv/x", "recv/y", "core/state", "core/x", "core/y")}
    checked = 0
    for rs, rx, ry, cs, cx, cy in zip(*col.values()):
        if rs != 1 or cs != 1:
            continue
        # anneau de trois lignes : l'écriture ne doit pas écraser la fenêtre du cœur
        assert ry * WIDTH + rx - 3 * WIDTH <= (cy - 1) * WIDTH + cx - 1
        checked += 1
    assert checked > WIDTH * (HEIGHT - 2)


def test_stimulus_validation():
    """Test le refus de bancs de test mal dimensionnés."""
    with pytest.raises(ConfigurationError):
        GausStimulus([[0] * WIDTH])
    with pytest.raises(ConfigurationError):
        ConvStimulus([[200] * IN_SIZE] * IN_SIZE, [[0] * TAPS] * CHANNELS, 1)
    with pytest.raises(ConfigurationError):
        ConvStimulus([[0] * IN_SIZE] * IN_SIZE, [[0] * TAPS] * 3, 1)


def test_noc_scenario_validation():
    """Test le refus d'un scénario de maillage incohérent."""
    with pytest.raises(ConfigurationError):
        NocScenario(multicast_source=6)
    with pytest.raises(ConfigurationError):
        NocScenario(mesh=5)
    with pytest.raises(ConfigurationError):
        NocScenario(unicasts=((3, 3),))


def test_noc_golden_delivers_every_packet():
    """Test que l'oracle du maillage est atteint sur le scénario par défaut."""
    design, _ = build_design("router")
    stimulus = NocStimulus(NocScenario())

    run = run_golden(design, stimulus, [])

    assert run.outputs == oracle_output("router", stimulus)
    assert design.output_count(run.outputs) > 0


def test_noc_stimulus_from_config_runs_twice(tmp_path):
    """Test le banc de test du routeur construit depuis la configuration, rejoué deux fois."""
    config = load_campaign_config(write_config(tmp_path, "router"))
    stimulus = build_stimulus(config)
    design, _ = build_design("router", config)

    first = run_golden(design, stimulus, design.control_registers())
    second = run_golden(design, stimulus, design.control_registers())

    assert isinstance(stimulus, NocStimulus)
    assert stimulus.driven == first.cycles
    assert first.cycles == second.cycles
    assert first.trace.rows == second.trace.rows
    assert first.outputs == oracle_output("router", stimulus)
