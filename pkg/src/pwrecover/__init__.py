"""Password recovery toolkit.

A crypto library, account-recovery service, client CLI and statistical test
harness for recovering a forgotten password from a guess that matches it in at
least t of n positions. Core primitive: threshold ElGamal whose decryption
shares carry no validity proofs, so failed recovery attempts reveal neither
the plaintext nor which shares were genuine.
"""

from .elgamal import Ciphertext, KeyPair, PublicKey, decrypt, encrypt, hom_mul, keygen, rerandomize
from .group import (
    GroupParams,
    decode_message,
    encode_message,
    generate_params,
    hash_to_group,
    mac_to_scalar,
)
from .localpr import (
    LocalBlob,
    PasswordSpec,
    RecoveryOutcome,
    decode_password,
    encode_password,
    local_recover,
    local_register,
    match,
    sample_assumption_instance,
)
from .ot import OtReceiverState, OtResponse, ot_choose, ot_common, ot_recover, ot_respond
from .protocols import (
    ChalRespAuth,
    Challenge,
    HashAuth,
    RecoveryRecord,
    RecoveryResponse,
    SimpleAccount,
    cr_challenge,
    cr_prove,
    cr_register,
    cr_verify,
    crpr_register,
    crpr_run_local,
    hpr_client_recover,
    hpr_login_check,
    hpr_register,
    hpr_server_respond,
    simple_recover,
    simple_register,
)
from .threshold import (
    CombineResult,
    PartialDecryption,
    SharePoint,
    ShareSet,
    combine,
    interpolate_exponent,
    keygen_threshold,
    lagrange_coeff,
    share_decrypt,
)
from .vectors import REAL_2048, TEST_P64, TEST_P512, TOY_P23, TOY_P2027

__version__ = "0.1.0"
