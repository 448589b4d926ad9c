"""1-out-of-m oblivious transfer for group-element payloads.

Derived-key construction over the shared group: both sides hash a session id
to a common element C of unknown discrete log. The receiver publishes
B = g^k * C^choice, which is uniform whatever the choice; the sender encrypts
slot j under h_j = B * C^(-j), so only slot `choice` has key g^k and the
receiver can open exactly that one. Sender privacy is computational (DDH),
not information-theoretic. Communication is m ciphertexts per transfer.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .elgamal import Ciphertext, PublicKey, decrypt, encrypt
from .group import GroupParams, elem_inv, elem_mul, elem_pow, g_pow, hash_to_group


@dataclass(frozen=True)
class OtReceiverState:
    k: int
    choice: int
    m: int
    common: int
    session: bytes


@dataclass(frozen=True)
class OtResponse:
    slots: tuple[Ciphertext, ...]


def ot_common(params: GroupParams, session: bytes) -> int:
    """Common reference element; both parties derive it from the session id."""
    return hash_to_group(params, session)


def ot_choose(
    params: GroupParams, common: int, m: int, choice: int, rng
) -> tuple[OtReceiverState, int]:
    if not 0 <= choice < m:
        raise ValueError(f"choice {choice} out of range [0, {m})")
    k = rng.randrange(params.q)
    B = elem_mul(params, g_pow(params, k), elem_pow(params, common, choice))
    return OtReceiverState(k=k, choice=choice, m=m, common=common, session=b""), B


def ot_respond(
    params: GroupParams, common: int, B: int, payloads: Sequence[int], rng
) -> OtResponse:
    """Encrypt payload j under the derived key B * C^(-j), fresh randomness per slot.

    Slot keys walk down by one C-inverse multiplication each, so the cost is
    two exponentiations per slot.
    """
    c_inv = elem_inv(params, common)
    slots = []
    h_j = B
    for payload in payloads:
        r = rng.randrange(1, params.q)
        slots.append(encrypt(PublicKey(params, h_j), payload, r))
        h_j = elem_mul(params, h_j, c_inv)
    return OtResponse(slots=tuple(slots))


def ot_recover(params: GroupParams, state: OtReceiverState, resp: OtResponse) -> int:
    if len(resp.slots) != state.m:
        raise ValueError(f"expected {state.m} slots, got {len(resp.slots)}")
    return decrypt(params, state.k, resp.slots[state.choice])
