"""Published group parameters.

The two tiny groups are for exhaustive oracle tests and statistical games; the
64-bit and 512-bit groups are frozen outputs of generate_params used by the
test suite ("toy mode" on the CLI maps to TEST_P64). REAL_2048 is the RFC 3526
2048-bit MODP group, whose p is a safe prime and whose generator 2 generates
the quadratic-residue subgroup.
"""

from .group import GroupParams

TOY_P23 = GroupParams(p=23, q=11, g=2)

TOY_P2027 = GroupParams(p=2027, q=1013, g=4)

TEST_P64 = GroupParams(
    p=0xD68B5D85A727EC67,
    q=0x6B45AEC2D393F633,
    g=0x9A01DCEED2461325,
)

TEST_P512 = GroupParams(
    p=int(
        "b938314e917b8f459607bd16e16e80827ba2b1078009e220873e7043ff7d9c45"
        "1a113655e705f433e9185b82b92b2ea9fae2959ddef064885bd6bd05cf79f657",
        16,
    ),
    q=int(
        "5c9c18a748bdc7a2cb03de8b70b740413dd15883c004f110439f3821ffbece22"
        "8d089b2af382fa19f48c2dc15c959754fd714aceef7832442deb5e82e7bcfb2b",
        16,
    ),
    g=int(
        "a0133dacc629018708d8ec180fc40dfaa004fba96f931558c879e6587a80c9ab"
        "bbbe702861dd9e8983a64524b29237d636ea2d56b9bc83556494d7490bebbc8d",
        16,
    ),
)

REAL_2048 = GroupParams(
    p=int(
        "FFFFFFFFFFFFFFFFC90FDAA22168C234C4C6628B80DC1CD129024E088A67CC74"
        "020BBEA63B139B22514A08798E3404DDEF9519B3CD3A431B302B0A6DF25F1437"
        "4FE1356D6D51C245E485B576625E7EC6F44C42E9A637ED6B0BFF5CB6F406B7ED"
        "EE386BFB5A899FA5AE9F24117C4B1FE649286651ECE45B3DC2007CB8A163BF05"
        "98DA48361C55D39A69163FA8FD24CF5F83655D23DCA3AD961C62F356208552BB"
        "9ED529077096966D670C354E4ABC9804F1746C08CA18217C32905E462E36CE3B"
        "E39E772C180E86039B2783A2EC07A28FB5C55DF06F4C52C9DE2BCBF695581718"
        "3995497CEA956AE515D2261898FA051015728E5A8AACAA68FFFFFFFFFFFFFFFF",
        16,
    ),
    q=int(
        "7FFFFFFFFFFFFFFFE487ED5110B4611A62633145C06E0E68948127044533E63A"
        "0105DF531D89CD9128A5043CC71A026EF7CA8CD9E69D218D98158536F92F8A1B"
        "A7F09AB6B6A8E122F242DABB312F3F637A262174D31BF6B585FFAE5B7A035BF6"
        "F71C35FDAD44CFD2D74F9208BE258FF324943328F6722D9EE1003E5C50B1DF82"
        "CC6D241B0E2AE9CD348B1FD47E9267AFC1B2AE91EE51D6CB0E3179AB1042A95D"
        "CF6A9483B84B4B36B3861AA7255E4C0278BA3604650C10BE19482F23171B671D"
        "F1CF3B960C074301CD93C1D17603D147DAE2AEF837A62964EF15E5FB4AAC0B8C"
        "1CCAA4BE754AB5728AE9130C4C7D02880AB9472D455655347FFFFFFFFFFFFFFF",
        16,
    ),
    g=2,
)
