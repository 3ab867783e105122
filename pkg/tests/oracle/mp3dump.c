/* Reference dump of Layer III granule 0 / channel 0 fields, built on minimp3.
 *
 * Prints one JSON object per frame that minimp3 syncs to. Requantized values
 * are rescaled to the ISO convention (minimp3 folds a 2^-1 output gain and the
 * mid/side 1/sqrt(2) into its scalefactor gains).
 *
 *   mp3dump file.mp3
 */
#define MINIMP3_IMPLEMENTATION
#define MINIMP3_NO_SIMD
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include "minimp3.h"

/* L3_decode_scalefactors with the raw integer scalefactors exposed. */
static int dump_scalefactors(const uint8_t *hdr, uint8_t *ist_pos, bs_t *bs, const L3_gr_info_t *gr, float *scf, uint8_t *raw)
{
    static const uint8_t g_scf_partitions[3][28] = {
        { 6,5,5, 5,6,5,5,5,6,5, 7,3,11,10,0,0, 7, 7, 7,0, 6, 6,6,3, 8, 8,5,0 },
        { 8,9,6,12,6,9,9,9,6,9,12,6,15,18,0,0, 6,15,12,0, 6,12,9,6, 6,18,9,0 },
        { 9,9,6,12,9,9,9,9,9,9,12,6,18,18,0,0,12,12,12,0,12, 9,9,6,15,12,9,0 }
    };
    static const uint8_t g_scfc_decode[16] = { 0,1,2,3, 12,5,6,7, 9,10,11,13, 14,15,18,19 };
    const uint8_t *scf_partition = g_scf_partitions[!!gr->n_short_sfb + !gr->n_long_sfb];
    uint8_t scf_size[4], iscf[40];
    int i, n, scf_shift = gr->scalefac_scale + 1, gain_exp;
    float gain;
    int part = g_scfc_decode[gr->scalefac_compress];
    scf_size[1] = scf_size[0] = (uint8_t)(part >> 2);
    scf_size[3] = scf_size[2] = (uint8_t)(part & 3);
    L3_read_scalefactors(iscf, ist_pos, scf_size, scf_partition, bs, gr->scfsi);
    n = scf_partition[0] + scf_partition[1] + scf_partition[2] + scf_partition[3];
    memcpy(raw, iscf, n);

    if (gr->n_short_sfb)
    {
        int sh = 3 - scf_shift;
        for (i = 0; i < gr->n_short_sfb; i += 3)
        {
            iscf[gr->n_long_sfb + i + 0] += gr->subblock_gain[0] << sh;
            iscf[gr->n_long_sfb + i + 1] += gr->subblock_gain[1] << sh;
            iscf[gr->n_long_sfb + i + 2] += gr->subblock_gain[2] << sh;
        }
    } else if (gr->preflag)
    {
        static const uint8_t g_preamp[10] = { 1,1,1,1,2,2,3,3,3,2 };
        for (i = 0; i < 10; i++)
            iscf[11 + i] += g_preamp[i];
    }
    gain_exp = gr->global_gain + BITS_DEQUANTIZER_OUT*4 - 210 - (HDR_IS_MS_STEREO(hdr) ? 2 : 0);
    gain = L3_ldexp_q2(1 << (MAX_SCFI/4), MAX_SCFI - gain_exp);
    for (i = 0; i < (int)(gr->n_long_sfb + gr->n_short_sfb); i++)
        scf[i] = L3_ldexp_q2(gain, iscf[i] << scf_shift);
    return n;
}

static void print_ints(const char *key, const int *v, int n)
{
    printf(",\"%s\":[", key);
    for (int i = 0; i < n; i++) printf(i ? ",%d" : "%d", v[i]);
    printf("]");
}

int main(int argc, char **argv)
{
    if (argc != 2) { fprintf(stderr, "usage: mp3dump file.mp3\n"); return 2; }
    FILE *f = fopen(argv[1], "rb");
    if (!f) { perror("open"); return 1; }
    fseek(f, 0, SEEK_END);
    long size = ftell(f);
    fseek(f, 0, SEEK_SET);
    uint8_t *data = malloc(size + 16);
    if (fread(data, 1, size, f) != (size_t)size) return 1;
    fclose(f);

    static mp3dec_t dec;
    static mp3dec_scratch_t scratch;
    mp3dec_init(&dec);
    long pos = 0;
    while (pos < size)
    {
        const uint8_t *mp3 = data + pos;
        int mp3_bytes = (int)(size - pos), i = 0, frame_size = 0;
        if (mp3_bytes > 4 && dec.header[0] == 0xff && hdr_compare(dec.header, mp3))
        {
            frame_size = hdr_frame_bytes(mp3, dec.free_format_bytes) + hdr_padding(mp3);
            if (frame_size != mp3_bytes && (frame_size + HDR_SIZE > mp3_bytes || !hdr_compare(mp3, mp3 + frame_size)))
                frame_size = 0;
        }
        if (!frame_size)
        {
            memset(&dec, 0, sizeof(mp3dec_t));
            i = mp3d_find_frame(mp3, mp3_bytes, &dec.free_format_bytes, &frame_size);
            if (!frame_size || i + frame_size > mp3_bytes)
                break;
        }
        const uint8_t *hdr = mp3 + i;
        memcpy(dec.header, hdr, HDR_SIZE);
        long offset = pos + i;
        pos += i + frame_size;
        if (HDR_GET_LAYER(hdr) != 1 || !HDR_TEST_MPEG1(hdr))
            continue;

        bs_t bs_frame[1];
        bs_init(bs_frame, hdr + HDR_SIZE, frame_size - HDR_SIZE);
        if (HDR_IS_CRC(hdr))
            get_bits(bs_frame, 16);
        int main_data_begin = L3_read_side_info(bs_frame, scratch.gr_info, hdr);
        if (main_data_begin < 0 || bs_frame->pos > bs_frame->limit)
        {
            printf("{\"offset\":%ld,\"ok\":0,\"error\":\"side_info\"}\n", offset);
            mp3dec_init(&dec);
            continue;
        }
        int success = L3_restore_reservoir(&dec, bs_frame, &scratch, main_data_begin);
        const L3_gr_info_t *gr = &scratch.gr_info[0];
        int nch = HDR_IS_MONO(hdr) ? 1 : 2;
        int ms = HDR_IS_MS_STEREO(hdr);
        int ws = gr->block_type != 0;
        printf("{\"offset\":%ld,\"ok\":%d,\"frame_bytes\":%d,\"bitrate\":%u,\"sampling_rate\":%u,\"mode\":%d,\"mode_extension\":%d",
               offset, success, frame_size, hdr_bitrate_kbps(hdr), hdr_sample_rate_hz(hdr),
               HDR_GET_STEREO_MODE(hdr), HDR_GET_STEREO_MODE_EXT(hdr));
        printf(",\"main_data_begin\":%d,\"part2_3_length\":%d,\"big_values\":%d,\"global_gain\":%d,\"scalefac_compress\":%d",
               main_data_begin, gr->part_23_length, gr->big_values, gr->global_gain, gr->scalefac_compress);
        printf(",\"window_switching_flag\":%d,\"block_type\":%d,\"mixed_block_flag\":%d", ws, gr->block_type, gr->mixed_block_flag);
        int ts[3] = { gr->table_select[0], gr->table_select[1], gr->table_select[2] };
        int sbg[3] = { ws ? gr->subblock_gain[0] : 0, ws ? gr->subblock_gain[1] : 0, ws ? gr->subblock_gain[2] : 0 };
        print_ints("table_select", ts, 3);
        print_ints("subblock_gain", sbg, 3);
        printf(",\"region0_count\":%d,\"region1_count\":%d", gr->region_count[0], ws ? -1 : gr->region_count[1]);
        printf(",\"preflag\":%d,\"scalefac_scale\":%d,\"count1table_select\":%d", gr->preflag, gr->scalefac_scale, gr->count1_table);

        if (success)
        {
            int start = scratch.bs.pos, total = 0;
            for (int k = 0; k < 2 * nch; k++)
                total += scratch.gr_info[k].part_23_length;
            int limit = start + gr->part_23_length;
            uint8_t raw[40];
            int n = dump_scalefactors(hdr, scratch.ist_pos[0], &scratch.bs, gr, scratch.scf, raw);
            int part2_bits = scratch.bs.pos - start;
            bs_t copy = scratch.bs;
            static float deq[576], unit[576], ones[64];
            memset(deq, 0, sizeof deq);
            memset(unit, 0, sizeof unit);
            for (int k = 0; k < 64; k++) ones[k] = 1.0f;
            L3_huffman(deq, &scratch.bs, gr, scratch.scf, limit);
            L3_huffman(unit, &copy, gr, ones, limit);

            int rawi[40], q[576];
            for (int k = 0; k < n; k++) rawi[k] = raw[k];
            for (int k = 0; k < 576; k++)
            {
                int mag = (int)lround(pow(fabs((double)unit[k]), 0.75));
                q[k] = unit[k] < 0 ? -mag : mag;
            }
            printf(",\"part2_bits\":%d", part2_bits);
            print_ints("scalefactors", rawi, n);
            print_ints("quantized", q, 576);
            double rescale = 2.0 * (ms ? sqrt(2.0) : 1.0);
            printf(",\"requantized\":[");
            for (int k = 0; k < 576; k++) printf(k ? ",%.9g" : "%.9g", deq[k] * rescale);
            printf("]");
            scratch.bs.pos = start + total;
        }
        printf("}\n");
        L3_save_reservoir(&dec, &scratch);
    }
    return 0;
}
