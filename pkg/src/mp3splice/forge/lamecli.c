/* Minimal LAME front end: 16-bit PCM WAV in, MP3 out.
 *
 *   lamecli (-b KBPS | -V Q) in.wav out.mp3
 *   lamecli --version
 *
 * Links against the system libmp3lame (no development headers needed).
 */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include <stdint.h>

typedef void *lame_t;
extern lame_t lame_init(void);
extern int lame_set_in_samplerate(lame_t, int);
extern int lame_set_out_samplerate(lame_t, int);
extern int lame_set_num_channels(lame_t, int);
extern int lame_set_brate(lame_t, int);
extern int lame_set_VBR(lame_t, int);
extern int lame_set_VBR_q(lame_t, int);
extern int lame_set_bWriteVbrTag(lame_t, int);
extern int lame_set_mode(lame_t, int);
extern int lame_set_quality(lame_t, int);
extern int lame_init_params(lame_t);
extern int lame_encode_buffer(lame_t, const short *, const short *, int, unsigned char *, int);
extern int lame_encode_flush(lame_t, unsigned char *, int);
extern size_t lame_get_lametag_frame(lame_t, unsigned char *, size_t);
extern int lame_close(lame_t);
extern const char *get_lame_version(void);

#define VBR_DEFAULT 4
#define MODE_JOINT 1
#define MODE_MONO 3

static uint32_t rd32(const unsigned char *p) { return p[0] | p[1] << 8 | p[2] << 16 | (uint32_t)p[3] << 24; }
static uint16_t rd16(const unsigned char *p) { return p[0] | p[1] << 8; }

static int fail(const char *msg) { fprintf(stderr, "lamecli: %s\n", msg); return 1; }

int main(int argc, char **argv)
{
    if (argc == 2 && !strcmp(argv[1], "--version")) {
        printf("lamecli (LAME %s)\n", get_lame_version());
        return 0;
    }
    /* accepted for command-line compatibility with lame; the rate is pinned anyway */
    if (argc == 7 && !strcmp(argv[1], "--resample")) {
        argv += 2;
        argc -= 2;
    }
    if (argc != 5 || (strcmp(argv[1], "-b") && strcmp(argv[1], "-V")))
        return fail("usage: lamecli [--resample 44.1] (-b KBPS | -V Q) in.wav out.mp3");

    FILE *f = fopen(argv[3], "rb");
    if (!f) return fail("cannot open input");
    fseek(f, 0, SEEK_END);
    long size = ftell(f);
    fseek(f, 0, SEEK_SET);
    unsigned char *wav = malloc(size);
    if (fread(wav, 1, size, f) != (size_t)size) return fail("short read");
    fclose(f);
    if (size < 12 || memcmp(wav, "RIFF", 4) || memcmp(wav + 8, "WAVE", 4)) return fail("not a RIFF/WAVE file");

    int channels = 0, rate = 0, bits = 0;
    const unsigned char *pcm = NULL;
    uint32_t pcm_bytes = 0;
    for (long pos = 12; pos + 8 <= size;) {
        uint32_t len = rd32(wav + pos + 4);
        if (!memcmp(wav + pos, "fmt ", 4)) {
            channels = rd16(wav + pos + 10);
            rate = rd32(wav + pos + 12);
            bits = rd16(wav + pos + 22);
        } else if (!memcmp(wav + pos, "data", 4)) {
            pcm = wav + pos + 8;
            pcm_bytes = len;
            if (pos + 8 + (long)len > size) pcm_bytes = size - pos - 8;
            break;
        }
        pos += 8 + len + (len & 1);
    }
    if (!pcm || bits != 16 || channels < 1 || channels > 2) return fail("need 16-bit mono/stereo PCM");

    int n = pcm_bytes / (2 * channels);
    short *left = malloc(sizeof(short) * (n + 1)), *right = malloc(sizeof(short) * (n + 1));
    for (int i = 0; i < n; i++) {
        left[i] = (short)rd16(pcm + 2 * (i * channels));
        right[i] = channels == 2 ? (short)rd16(pcm + 2 * (i * channels + 1)) : left[i];
    }

    lame_t gf = lame_init();
    lame_set_in_samplerate(gf, rate);
    lame_set_out_samplerate(gf, rate);  /* never let LAME resample */
    lame_set_num_channels(gf, channels);
    lame_set_mode(gf, channels == 1 ? MODE_MONO : MODE_JOINT);
    lame_set_bWriteVbrTag(gf, 1);
    if (argv[1][1] == 'b') {
        lame_set_brate(gf, atoi(argv[2]));
    } else {
        lame_set_VBR(gf, VBR_DEFAULT);
        lame_set_VBR_q(gf, atoi(argv[2]));
    }
    if (lame_init_params(gf) < 0) return fail("bad encoder parameters");

    size_t cap = (size_t)(1.25 * n) + 7200 + 16384;
    unsigned char *mp3 = malloc(cap);
    int used = lame_encode_buffer(gf, left, right, n, mp3, (int)cap);
    if (used < 0) return fail("encode failed");
    int tail = lame_encode_flush(gf, mp3 + used, (int)(cap - used));
    if (tail < 0) return fail("flush failed");
    used += tail;

    unsigned char tag[2880];
    size_t tag_len = lame_get_lametag_frame(gf, tag, sizeof tag);
    if (tag_len > 0 && tag_len <= (size_t)used) memcpy(mp3, tag, tag_len);

    FILE *o = fopen(argv[4], "wb");
    if (!o || fwrite(mp3, 1, used, o) != (size_t)used) return fail("cannot write output");
    fclose(o);
    lame_close(gf);
    return 0;
}
