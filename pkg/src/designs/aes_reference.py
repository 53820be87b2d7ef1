"""
Implémentation logicielle de référence d'AES-128 (chiffrement seul), indépendante du
modèle matériel : S-box calculée par inversion dans GF(2^8), état manipulé en matrice
4x4 colonne par colonne.
"""
from typing import List, Sequence


def _gmul(a: int, b: int) -> int:
    p = 0
    for _ in range(8):
        if b & 1:
            p ^= a
        hi = a & 0x80
        a = (a << 1) & 0xFF
        if hi:
            a ^= 0x1B
        b >>= 1
    return p


def _inverse(a: int) -> int:
    if a == 0:
        return 0
    for b in range(1, 256):
        if _gmul(a, b) == 1:
            return b
    raise ArithmeticError(a)


def _affine(b: int) -> int:
    result = 0x63
    for i in range(8):
        bit = ((b >> i) ^ (b >> ((i + 4) % 8)) ^ (b >> ((i + 5) % 8))
               ^ (b >> ((i + 6) % 8)) ^ (b >> ((i + 7) % 8))) & 1
        result ^= bit << i
    return result


SBOX: List[int] = [_affine(_inverse(x)) for x in range(256)]
RCON = [0x01, 0x02, 0x04, 0x08, 0x10, 0x20, 0x40, 0x80, 0x1B, 0x36]


def expand_key(key: bytes) -> List[List[List[int]]]:
    """Retourne les 11 clés de tour sous forme de matrices state[ligne][colonne]."""
    if len(key) != 16:
        raise ValueError("La clé AES-128 doit faire 16 octets")
    words = [list(key[4 * i:4 * i + 4]) for i in range(4)]
    for i in range(4, 44):
        temp = list(words[i - 1])
        if i % 4 == 0:
            temp = temp[1:] + temp[:1]
            temp = [SBOX[b] for b in temp]
            temp[0] ^= RCON[i // 4 - 1]
        words.append([words[i - 4][j] ^ temp[j] for j in range(4)])
    keys = []
    for r in range(11):
        cols = words[4 * r:4 * r + 4]
        keys.append([[cols[c][row] for c in range(4)] for row in range(4)])
    return keys


def _add_round_key(state: List[List[int]], rk: List[List[int]]) -> None:
    for r in range(4):
        for c in range(4):
            state[r][c] ^= rk[r][c]


def _mix_column(col: Sequence[int]) -> List[int]:
    a0, a1, a2, a3 = col
    return [
        _gmul(a0, 2) ^ _gmul(a1, 3) ^ a2 ^ a3,
        a0 ^ _gmul(a1, 2) ^ _gmul(a2, 3) ^ a3,
        a0 ^ a1 ^ _gmul(a2, 2) ^ _gmul(a3, 3),
        _gmul(a0, 3) ^ a1 ^ a2 ^ _gmul(a3, 2),
    ]


def encrypt_block(key: bytes, plaintext: bytes) -> bytes:
    """Chiffre un bloc de 16 octets."""
    if len(plaintext) != 16:
        raise ValueError("Le bloc doit faire 16 octets")
    keys = expand_key(key)
    state = [[plaintext[c * 4 + r] for c in range(4)] for r in range(4)]
    _add_round_key(state, keys[0])
    for rnd in range(1, 11):
        state = [[SBOX[b] for b in row] for row in state]
        state = [state[r][r:] + state[r][:r] for r in range(4)]
        if rnd != 10:
            cols = [_mix_column([state[r][c] for r in range(4)]) for c in range(4)]
            state = [[cols[c][r] for c in range(4)] for r in range(4)]
        _add_round_key(state, keys[rnd])
    return bytes(state[r][c] for c in range(4) for r in range(4))


def encrypt_int(key: int, plaintext: int) -> int:
    """Variante entière (128 bits, octet 0 en poids fort)."""
    ct = encrypt_block(key.to_bytes(16, "big"), plaintext.to_bytes(16, "big"))
    return int.from_bytes(ct, "big")
