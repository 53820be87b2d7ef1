"""
Accélérateur de convolution 3x3 (entrée 8x8x1 signée 8 bits, 4 canaux de sortie, ReLU).

Sous-modules : contrôleur principal, chargement des poids, lecture des activations
(ligne, colonne, tap), contrôleur MAC avec accumulateur, unité de sortie. Les sorties
sont émises canal par canal, puis ligne, puis colonne (6x6 positions valides).
"""
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np

from src.designs.base import DATA, NetBuilder, inp, out, reg, sub
from src.monitors.bundle import MonitorBundle, SelectorPreset
from src.sim.design import Design, StimulusProgram
from src.utils.errors import ConfigurationError

IN_SIZE = 8
K = 3
OUT_SIZE = IN_SIZE - K + 1
CHANNELS = 4
TAPS = K * K
OUT_MASK = (1 << 20) - 1

# états
IDLE, WLOAD, COMP, DONE = 0, 1, 2, 3
WT_IDLE, WT_LOAD, WT_DONE = 0, 1, 2
MAC_IDLE, MAC_ACC, MAC_EMIT = 0, 1, 2


def _signed8(value: int) -> int:
    return value - 0x100 if value & 0x80 else value


@dataclass
class ConvStimulus(StimulusProgram):
    """Banc de test : mémoire d'activations adressée par le circuit, flux de poids."""

    activations: List[List[int]] = field(default_factory=list)
    weights: List[List[int]] = field(default_factory=list)
    relu: int = 1

    def __post_init__(self):
        if len(self.activations) != IN_SIZE or any(len(r) != IN_SIZE for r in self.activations):
            raise ConfigurationError(f"Les activations doivent former une matrice {IN_SIZE}x{IN_SIZE}")
        if len(self.weights) != CHANNELS or any(len(w) != TAPS for w in self.weights):
            raise ConfigurationError(f"Les poids doivent former {CHANNELS} noyaux de {TAPS} valeurs")
        values = [v for r in self.activations for v in r] + [v for w in self.weights for v in w]
        if any(not -128 <= v <= 127 for v in values):
            raise ConfigurationError("Activations et poids doivent être des entiers signés 8 bits")
        self._flat_w = [v for w in self.weights for v in w]
        self._flat_a = [v for r in self.activations for v in r]
        self._ptr = 0
        self._offered = False

    def reset(self) -> None:
        self._ptr = 0
        self._offered = False

    def drive(self, cycle: int, design: Design) -> dict:
        wt_valid = design.read_raw("wt_req") == 1 and self._ptr < len(self._flat_w)
        self._offered = wt_valid
        act_valid = design.read_raw("act_req") == 1
        addr = design.read_raw("df/act_addr")
        act = self._flat_a[addr] if addr < len(self._flat_a) else 0
        return {
            "start": int(cycle == 1),
            "cfg_nch": CHANNELS,
            "cfg_relu": self.relu,
            "wt_valid": int(wt_valid),
            "wt_data": self._flat_w[self._ptr] & 0xFF if wt_valid else 0,
            "act_valid": int(act_valid),
            "act_data": act & 0xFF,
            "out_ready": 1,
        }

    def settle(self, design: Design) -> None:
        if self._offered:
            self._ptr += 1


class ConvDesign(Design):
    """Couche de convolution séquentielle à un MAC."""

    design_id = "conv"

    def __init__(self):
        super().__init__([
            inp("start", 1),
            inp("wt_valid", 1),
            inp("act_valid", 1),
            inp("out_ready", 1),
            inp("cfg_nch", 3),
            inp("cfg_relu", 1),
            inp("wt_data", 8, DATA),
            inp("act_data", 8, DATA),
            out("out_valid", 1),
            out("out_data", 20, DATA),
            out("done", 1),
            out("busy", 1),
            out("wt_req", 1),
            out("act_req", 1),
            sub("wt/busy", 1),
            sub("wt/progress", 6),
            sub("df/cube_idx", 6),
            sub("df/act_addr", 6),
            sub("mac/acc_en", 1),
            sub("mac/ch_out", 3),
            sub("out/wr_en", 1),
            sub("out/count", 8),
            reg("ctrl/state", 2),
            reg("ctrl/nch", 3),
            reg("ctrl/relu", 1),
            reg("wt/addr", 6),
            reg("wt/state", 2),
            reg("df/row", 3),
            reg("df/col", 3),
            reg("df/tap", 4),
            reg("mac/ch", 3),
            reg("mac/state", 2),
            reg("out/addr", 8),
        ])
        self._w = [0] * 64
        self._acc = 0
        self._record: List[int] = []

    def _reset_state(self) -> None:
        self._w = [0] * 64
        self._acc = 0
        self._record = []
        self._combinational()

    def _combinational(self) -> None:
        v = self._v
        ctrl, row, col, tap = v["ctrl/state"], v["df/row"], v["df/col"], v["df/tap"]
        v["done"] = int(ctrl == DONE)
        v["busy"] = int(ctrl in (WLOAD, COMP))
        v["wt_req"] = int(v["wt/state"] == WT_LOAD)
        v["act_req"] = int(ctrl == COMP and v["mac/state"] == MAC_ACC)
        v["wt/busy"] = v["wt_req"]
        v["wt/progress"] = v["wt/addr"]
        v["df/cube_idx"] = (row * OUT_SIZE + col) & 0x3F
        v["df/act_addr"] = ((row + tap // K) * IN_SIZE + col + tap % K) & 0x3F
        v["mac/ch_out"] = v["mac/ch"]
        v["out/wr_en"] = v["out_valid"]
        v["out/count"] = v["out/addr"]

    def _after_flip(self, ref) -> None:
        self._combinational()

    def _step(self, inputs: dict) -> None:
        cur = dict(self._v)
        v = self._v
        v["out_valid"] = 0
        v["mac/acc_en"] = 0
        ctrl = cur["ctrl/state"]

        if ctrl == IDLE and inputs["start"]:
            v["ctrl/state"] = WLOAD
            v["ctrl/nch"] = inputs["cfg_nch"]
            v["ctrl/relu"] = inputs["cfg_relu"]
            v["wt/state"] = WT_LOAD

        if cur["wt/state"] == WT_LOAD and inputs["wt_valid"]:
            addr = cur["wt/addr"]
            self._w[addr] = _signed8(inputs["wt_data"])
            if addr == cur["ctrl/nch"] * TAPS - 1:
                v["wt/state"] = WT_DONE
                v["wt/addr"] = 0
                if ctrl == WLOAD:
                    v["ctrl/state"] = COMP
                    v["mac/state"] = MAC_ACC
            else:
                v["wt/addr"] = self._mask("wt/addr", addr + 1)

        if ctrl == COMP:
            self._mac(cur, inputs)
        self._combinational()

    def _mac(self, cur: dict, inputs: dict) -> None:
        v = self._v
        state = cur["mac/state"]
        if state == MAC_ACC and inputs["act_valid"]:
            tap, ch = cur["df/tap"], cur["mac/ch"]
            self._acc += _signed8(inputs["act_data"]) * self._w[(ch * TAPS + tap) & 0x3F]
            v["mac/acc_en"] = 1
            if tap >= TAPS - 1:
                v["df/tap"] = 0
                v["mac/state"] = MAC_EMIT
            else:
                v["df/tap"] = tap + 1
        elif state == MAC_EMIT and inputs["out_ready"]:
            value = max(self._acc, 0) if cur["ctrl/relu"] else self._acc
            value &= OUT_MASK
            v["out_valid"] = 1
            v["out_data"] = value
            self._record.append(value)
            self._acc = 0
            v["out/addr"] = self._mask("out/addr", cur["out/addr"] + 1)
            row, col, ch = cur["df/row"], cur["df/col"], cur["mac/ch"]
            v["mac/state"] = MAC_ACC
            if col < OUT_SIZE - 1:
                v["df/col"] = col + 1
                return
            v["df/col"] = 0
            if row < OUT_SIZE - 1:
                v["df/row"] = row + 1
                return
            v["df/row"] = 0
            if ch < cur["ctrl/nch"] - 1:
                v["mac/ch"] = ch + 1
                return
            v["mac/ch"] = 0
            v["mac/state"] = MAC_IDLE
            v["ctrl/state"] = DONE

    def done(self) -> bool:
        return self._v["ctrl/state"] == DONE

    def outputs(self) -> List[int]:
        return list(self._record)

    def oracle_output(self, stimulus: ConvStimulus) -> List[int]:
        return conv_oracle(stimulus.activations, stimulus.weights, stimulus.relu)


def conv_reference(activations, weights, relu: int = 1) -> np.ndarray:
    """Cartes de sortie de référence, forme (canaux, 6, 6), valeurs signées."""
    act = np.asarray(activations, dtype=np.int64)
    kernels = np.asarray(weights, dtype=np.int64).reshape(-1, K, K)
    windows = np.lib.stride_tricks.sliding_window_view(act, (K, K))
    maps = np.einsum("rcij,kij->krc", windows, kernels)
    return np.maximum(maps, 0) if relu else maps


def conv_oracle(activations, weights, relu: int = 1) -> List[int]:
    """Flux de sorties attendu (canal, ligne, colonne), masqué sur 20 bits."""
    maps = conv_reference(activations, weights, relu)
    return [int(v) & OUT_MASK for v in maps.reshape(-1)]


def _conv_nets(d: ConvDesign) -> list:
    total = CHANNELS * OUT_SIZE * OUT_SIZE
    nets = []

    n = NetBuilder("CONV_1", d)  # initiation du traitement puis boucle de calcul
    n.on("P0", "A", "ctrl/state", 2, target=WLOAD)
    n.on("A", "B", "ctrl/state", 2, target=COMP)
    n.on("B", "C", "df/tap", 2, target=TAPS - 1)
    n.on("C", "D", "mac/state", 2, target=MAC_EMIT)
    n.on("D", "B", "out_valid", 2, target=1)
    n.on("B", "End", "ctrl/state", 2, target=DONE, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("CONV_2", d)  # requêtes d'activations
    n.on("P0", "A", "busy", 2, target=1)
    n.on("A", "B", "act_req", 2, target=1)
    n.on("B", "A", "act_req", 2, target=0)
    n.on("A", "End", "done", 2, target=1, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("CONV_3", d)  # balayage des colonnes puis des lignes
    n.on("P0", "A", "ctrl/state", 2, target=COMP)
    n.on("A", "B", "df/col", 2, target=OUT_SIZE - 1)
    n.on("B", "A", "df/col", 2, target=0)
    n.on("A", "End", "df/row", 3, index=OUT_SIZE * CHANNELS, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("CONV_4", d)  # chargement des poids
    n.on("P0", "A", "wt/state", 2, target=WT_LOAD)
    n.on("A", "B", "wt/addr", 3, index=CHANNELS * TAPS - 1)
    n.on("B", "End", "wt/state", 2, target=WT_DONE, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("CONV_5", d)  # progression des canaux
    n.on("P0", "A", "ctrl/state", 2, target=WLOAD)
    n.on("A", "B", "mac/state", 4, target=MAC_ACC, index=1)
    n.on("B", "C1", "out/addr", 3, index=total // 2)
    n.on("C1", "C", "mac/ch", 3, index=CHANNELS)
    n.on("C", "End", "ctrl/state", 2, target=DONE, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("CONV_6", d)  # cycle des taps
    n.on("A", "B", "df/tap", 2, target=1)
    n.on("B", "C", "df/tap", 2, target=TAPS - 1)
    n.on("C", "A", "df/tap", 2, target=0)
    n.on("A", "End", "done", 2, target=1, final=True)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("CONV_7", d)  # jalons du chargement des poids
    n.on("P0", "A", "wt/addr", 3, index=10)
    n.on("A", "B", "wt/addr", 3, index=20)
    n.on("B", "C", "wt/addr", 3, index=CHANNELS * TAPS)
    n.on("C", "End", "ctrl/state", 2, target=COMP, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("CONV_8", d)  # configuration puis poids puis calcul
    n.on("P0", "A", "ctrl/nch", 2, target=CHANNELS)
    n.on("A", "B", "wt/state", 2, target=WT_LOAD)
    n.on("B", "C", "wt/addr", 2, target=CHANNELS * TAPS - 1)
    n.on("C", "D", "wt/state", 2, target=WT_DONE)
    n.on("D", "End", "ctrl/state", 2, target=DONE, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("CONV_9", d)  # impulsions de sortie
    n.on("A", "B", "out_valid", 2, target=1)
    n.on("B", "A", "out_valid", 2, target=0)
    n.on("B", "End", "out/addr", 3, index=total, final=True)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("CONV_10", d)  # émission après chaque accumulation
    n.on("P0", "A", "busy", 2, target=1)
    n.on("A", "B", "mac/state", 2, target=MAC_EMIT)
    n.on("B", "A", "out_valid", 2, target=1)
    n.on("A", "End", "done", 2, target=1, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("CONV_11", d)  # accumulation puis sortie
    n.on("C", "A", "mac/acc_en", 2, target=1)
    n.on("A", "B", "mac/acc_en", 2, target=0)
    n.on("B", "C", "out_valid", 2, target=1)
    n.on("C", "End", "done", 2, target=1, final=True)
    nets.append(n.build({"C": 1}))

    n = NetBuilder("CONV_12", d)  # fin du dernier cube puis dernière sortie
    n.on("P0", "A", "df/cube_idx", 4, target=OUT_SIZE * OUT_SIZE - 1, index=CHANNELS)
    n.on("A", "B", "out_valid", 4, target=1, index=total)
    n.on("B", "End", "done", 2, target=1, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("CONV_13", d)  # changements de canal
    n.on("P0", "A", "ctrl/state", 2, target=COMP)
    n.on("A", "B", "mac/ch", 3, index=1)
    n.on("B", "C", "mac/ch", 3, index=2)
    n.on("C", "D", "mac/ch", 3, index=3)
    n.on("D", "End", "mac/ch", 3, index=CHANNELS, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("CONV_14", d)  # poids puis balayage des cubes
    n.on("P0", "A", "wt_req", 2, target=1)
    n.on("A", "B", "wt_req", 2, target=0)
    n.on("B", "C", "df/cube_idx", 3, index=OUT_SIZE * OUT_SIZE)
    n.on("C", "End", "df/cube_idx", 3, index=total, final=True)
    nets.append(n.build({"P0": 1}))
    return nets


CONV_PRESETS = [
    SelectorPreset(1, 1),
    SelectorPreset(2, 1), SelectorPreset(2, 2), SelectorPreset(2, 3), SelectorPreset(2, 4),
    SelectorPreset(3, 1), SelectorPreset(3, 2), SelectorPreset(3, 3), SelectorPreset(3, 4),
]


def build_conv() -> Tuple[ConvDesign, MonitorBundle]:
    """Construit l'accélérateur de convolution et ses détecteurs livrés (14 réseaux)."""
    design = ConvDesign()
    bundle = MonitorBundle("conv", _conv_nets(design), list(CONV_PRESETS), check_end=True)
    bundle.validate(design)
    return design, bundle
