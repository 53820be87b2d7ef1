"""
Cœur AES-128 par tours : deux demi-passes de S-box par tour, cinq blocs chiffrés à la
suite. Registres de contrôle : état de la FSM (2 bits), compteur de tours (4), compteur
de S-box (1) et étiquette de bloc (2).
"""
from dataclasses import dataclass, field
from typing import List, Tuple

from src.designs.aes_reference import encrypt_int
from src.designs.base import DATA, NetBuilder, inp, out, reg, sub
from src.monitors.bundle import MonitorBundle, SelectorPreset
from src.sim.design import Design, StimulusProgram
from src.utils.errors import ConfigurationError

IDLE, ROUND, FINAL, DONE = 0, 1, 2, 3
LAST_ROUND = 10


def _build_sbox() -> List[int]:
    # tables exp/log sur le générateur 3
    exp = [0] * 512
    log = [0] * 256
    x = 1
    for i in range(255):
        exp[i] = x
        log[x] = i
        x ^= (x << 1) ^ (0x11B if x & 0x80 else 0)
        x &= 0xFF
    for i in range(255, 512):
        exp[i] = exp[i - 255]
    box = []
    for a in range(256):
        inv = 0 if a == 0 else exp[255 - log[a]]
        s = inv
        for shift in (1, 2, 3, 4):
            s ^= ((inv << shift) | (inv >> (8 - shift))) & 0xFF
        box.append(s ^ 0x63)
    return box


SBOX = _build_sbox()


def _xtime(b: int) -> int:
    b <<= 1
    return (b ^ 0x11B) if b & 0x100 else b


def _round_keys(key: int) -> List[List[int]]:
    """Clés de tour sous forme de listes de 16 octets (octet 0 en tête)."""
    w = [(key >> (32 * (3 - i))) & 0xFFFFFFFF for i in range(4)]
    rcon = 1
    for i in range(4, 44):
        t = w[i - 1]
        if i % 4 == 0:
            t = ((t << 8) | (t >> 24)) & 0xFFFFFFFF
            t = int.from_bytes(bytes(SBOX[b] for b in t.to_bytes(4, "big")), "big")
            t ^= rcon << 24
            rcon = _xtime(rcon)
        w.append(w[i - 4] ^ t)
    keys = []
    for r in range(11):
        block = b"".join(word.to_bytes(4, "big") for word in w[4 * r:4 * r + 4])
        keys.append(list(block))
    return keys


@dataclass
class AesStimulus(StimulusProgram):
    """Banc de test : présente les blocs en clair un par un (poignée valid/ready)."""

    key: int
    plaintexts: List[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.plaintexts:
            raise ConfigurationError("Au moins un bloc en clair est requis")
        self._ptr = 0
        self._offered = False

    def reset(self) -> None:
        self._ptr = 0
        self._offered = False

    def drive(self, cycle: int, design: Design) -> dict:
        valid = self._ptr < len(self.plaintexts)
        self._offered = valid and design.read_raw("pt_ready") == 1
        return {
            "pt_valid": int(valid),
            "pt_eos": int(not valid),
            "pt_data": self.plaintexts[self._ptr] if valid else 0,
        }

    def settle(self, design: Design) -> None:
        if self._offered:
            self._ptr += 1


class AesDesign(Design):
    """Chiffreur AES-128 itératif."""

    design_id = "aes"

    def __init__(self, key: int):
        super().__init__([
            inp("pt_valid", 1),
            inp("pt_eos", 1),
            inp("pt_data", 128, DATA),
            out("pt_ready", 1),
            out("ct_valid", 1),
            out("ct_tag", 2),
            out("ct_data", 128, DATA),
            sub("enc/busy", 1),
            sub("keymem/last_round", 1),
            sub("sbox/phase", 1),
            reg("enc/state", 2),
            reg("enc/round", 4),
            reg("enc/sbox_ctr", 1),
            reg("enc/blk_ctr", 2),
        ])
        self.key = key
        self._keys = _round_keys(key)
        self._block: List[int] = [0] * 16
        self._record: List[Tuple[int, int]] = []

    def _reset_state(self) -> None:
        self._block = [0] * 16
        self._record = []
        self._combinational()

    def _combinational(self) -> None:
        v = self._v
        state = v["enc/state"]
        v["pt_ready"] = int(state == IDLE)
        v["enc/busy"] = int(state in (ROUND, FINAL))
        v["keymem/last_round"] = int(v["enc/round"] == LAST_ROUND)
        v["sbox/phase"] = v["enc/sbox_ctr"]

    def _after_flip(self, ref) -> None:
        self._combinational()

    def _step(self, inputs: dict) -> None:
        v = self._v
        state, rnd = v["enc/state"], v["enc/round"]
        v["ct_valid"] = 0
        if state == IDLE:
            if inputs["pt_valid"]:
                pt = inputs["pt_data"].to_bytes(16, "big")
                self._block = [b ^ k for b, k in zip(pt, self._keys[0])]
                v["enc/round"] = 1
                v["enc/sbox_ctr"] = 0
                v["enc/state"] = ROUND
        elif state == ROUND:
            if v["enc/sbox_ctr"] == 0:
                self._sub_bytes(0, 8)
                v["enc/sbox_ctr"] = 1
            else:
                self._sub_bytes(8, 16)
                self._shift_rows()
                if rnd != LAST_ROUND:
                    self._mix_columns()
                key = self._keys[rnd % 11]
                self._block = [b ^ k for b, k in zip(self._block, key)]
                v["enc/sbox_ctr"] = 0
                if rnd == LAST_ROUND:
                    v["enc/state"] = FINAL
                    v["enc/round"] = 0
                else:
                    v["enc/round"] = (rnd + 1) & 0xF
        elif state == FINAL:
            ct = int.from_bytes(bytes(self._block), "big")
            tag = v["enc/blk_ctr"]
            v["ct_valid"] = 1
            v["ct_tag"] = tag
            v["ct_data"] = ct
            self._record.append((tag, ct))
            v["enc/blk_ctr"] = (tag + 1) & 0x3
            v["enc/state"] = DONE if inputs["pt_eos"] else IDLE
        self._combinational()

    def _sub_bytes(self, lo: int, hi: int) -> None:
        for i in range(lo, hi):
            self._block[i] = SBOX[self._block[i]]

    def _shift_rows(self) -> None:
        b = self._block
        self._block = [b[((c + r) % 4) * 4 + r] for c in range(4) for r in range(4)]

    def _mix_columns(self) -> None:
        b = self._block
        mixed = []
        for c in range(4):
            col = b[4 * c:4 * c + 4]
            total = col[0] ^ col[1] ^ col[2] ^ col[3]
            for r in range(4):
                mixed.append(col[r] ^ total ^ _xtime(col[r] ^ col[(r + 1) % 4]))
        self._block = mixed

    def done(self) -> bool:
        return self._v["enc/state"] == DONE

    def outputs(self) -> List[Tuple[int, int]]:
        return list(self._record)

    def oracle_output(self, stimulus: AesStimulus) -> List[Tuple[int, int]]:
        return aes_oracle(stimulus)


def aes_oracle(stimulus: AesStimulus) -> List[Tuple[int, int]]:
    """Blocs chiffrés attendus, étiquetés modulo 4."""
    return [(i % 4, encrypt_int(stimulus.key, pt)) for i, pt in enumerate(stimulus.plaintexts)]


def _aes_nets(d: AesDesign) -> list:
    nets = []

    n = NetBuilder("AES_1", d)  # déroulement de la FSM
    n.on("P0", "P1", "enc/state", 2, target=ROUND)
    n.on("P1", "P2", "enc/round", 2, target=LAST_ROUND)
    n.on("P2", "P3", "enc/state", 2, target=FINAL)
    n.on("P3", "P0", "enc/state", 2, target=IDLE)
    n.on("P3", "End", "enc/state", 2, target=DONE, final=True)
    nets.append(n.build({"P0": 1}))

    n = NetBuilder("AES_2", d)  # alternance des demi-passes de S-box
    n.on("A", "B", "enc/sbox_ctr", 2, target=1)
    n.on("B", "A", "enc/sbox_ctr", 2, target=0)
    n.on("A", "End", "enc/sbox_ctr", 4, target=0, index=50, final=True)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("AES_3", d)  # acceptation puis émission d'un bloc
    n.on("A", "B", "pt_ready", 2, target=0)
    n.on("B", "C", "ct_valid", 2, target=1)
    n.on("C", "A", "pt_ready", 2, target=1)
    n.on("C", "End", "ct_valid", 4, target=1, index=5, final=True)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("AES_4", d)  # étiquette incrémentée à chaque émission
    n.on("A", "B", "ct_valid", 2, target=1)
    n.on("B", "A", "enc/blk_ctr", 1)
    n.on("A", "End", "enc/blk_ctr", 3, index=5, final=True)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("AES_5", d)  # S-box inactive en fin de chiffrement
    n.on("A", "B", "sbox/phase", 2, target=1)
    n.on("B", "A", "sbox/phase", 2, target=0)
    n.on("A", "C", "enc/state", 2, target=FINAL)
    n.on("C", "A", "enc/state", 2, target=IDLE)
    n.on("C", "End", "enc/state", 2, target=DONE, final=True)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("AES_6", d)  # dernier tour puis remise à zéro du compteur
    n.on("A", "B", "enc/round", 2, target=LAST_ROUND)
    n.on("B", "A", "enc/round", 2, target=0)
    n.on("A", "End", "enc/round", 4, target=0, index=5, final=True)
    nets.append(n.build({"A": 1}))

    n = NetBuilder("AES_7", d)  # occupation du cœur
    n.on("A", "B", "pt_ready", 2, target=0)
    n.on("B", "C", "enc/busy", 2, target=1)
    n.on("C", "A", "enc/busy", 2, target=0)
    n.on("A", "End", "enc/state", 2, target=DONE, final=True)
    nets.append(n.build({"A": 1}))
    return nets


AES_PRESETS = [
    SelectorPreset(1, 1), SelectorPreset(1, 2),
    SelectorPreset(2, 1),
    SelectorPreset(3, 1), SelectorPreset(3, 2), SelectorPreset(3, 3), SelectorPreset(3, 4),
]


def build_aes(key: int) -> Tuple[AesDesign, MonitorBundle]:
    """Construit le cœur AES et ses détecteurs livrés (7 réseaux)."""
    design = AesDesign(key)
    bundle = MonitorBundle("aes", _aes_nets(design), list(AES_PRESETS), check_end=True)
    bundle.validate(design)
    return design, bundle
