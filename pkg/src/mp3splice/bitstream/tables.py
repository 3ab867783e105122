"""Fixed MPEG-1 Layer III constants: header lookups and scalefactor bands."""

SAMPLES_PER_FRAME = 1152
GRANULE_LINES = 576

# bitrate_index -> kbps, MPEG-1 Layer III (0 = free format, 15 = forbidden)
BITRATES_KBPS = (None, 32, 40, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320, None)

SAMPLING_RATES = (44100, 48000, 32000, None)

CHANNEL_MODES = ("stereo", "joint", "dual", "mono")

BLOCK_TYPES = ("normal", "start", "short", "stop")

# scalefac_compress -> (slen1, slen2)
SLEN = (
    (0, 0), (0, 1), (0, 2), (0, 3), (3, 0), (1, 1), (1, 2), (1, 3),
    (2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3), (4, 2), (4, 3),
)

# long-block preemphasis added to scalefactors when preflag is set
PRETAB = (0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 3, 3, 3, 2, 0)

# scalefactor band boundaries in spectral lines, per sampling rate
SFB_LONG = {
    44100: (0, 4, 8, 12, 16, 20, 24, 30, 36, 44, 52, 62, 74, 90, 110, 134,
            162, 196, 238, 288, 342, 418, 576),
    48000: (0, 4, 8, 12, 16, 20, 24, 30, 36, 42, 50, 60, 72, 88, 106, 128,
            156, 190, 230, 276, 330, 384, 576),
    32000: (0, 4, 8, 12, 16, 20, 24, 30, 36, 44, 54, 66, 82, 102, 126, 156,
            194, 240, 296, 364, 448, 550, 576),
}

# short-block boundaries, per window (each window holds 192 lines)
SFB_SHORT = {
    44100: (0, 4, 8, 12, 16, 22, 30, 40, 52, 66, 84, 106, 136, 192),
    48000: (0, 4, 8, 12, 16, 22, 28, 38, 50, 64, 80, 100, 126, 192),
    32000: (0, 4, 8, 12, 16, 22, 30, 42, 58, 78, 104, 138, 180, 192),
}

N_LONG_SF = 21           # long bands carrying a transmitted scalefactor
N_SHORT_SF = 12          # short bands carrying a transmitted scalefactor
MIXED_LONG_BANDS = 8     # long bands at the bottom of a mixed block
MIXED_SHORT_START = 3    # first short band of a mixed block
