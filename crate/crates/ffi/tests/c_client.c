#include <stdio.h>
#include <string.h>

#include "pcm_em.h"

#define D 128
#define CLASSES 6

#define CHECK(call)                                                             \
    do {                                                                        \
        PcmStatus s_ = (call);                                                  \
        if (s_ != PCM_STATUS_OK) {                                              \
            fprintf(stderr, "%s: %s (%s)\n", #call, pcm_status_str(s_), pcm_last_error()); \
            return 1;                                                           \
        }                                                                       \
    } while (0)

static int8_t sign(unsigned k, unsigned i) {
    unsigned h = (k * 2654435761u) ^ (i * 40503u);
    h ^= h >> 13;
    h *= 0x5bd1e995u;
    h ^= h >> 15;
    return (h & 1) ? 1 : -1;
}

int main(void) {
    PcmMemoryConfig cfg;
    CHECK(pcm_memory_config_default(&cfg));
    cfg.rows = D;
    cfg.cols = 16;
    cfg.seed = 11;
    cfg.device.sigma_prog = 0.02;

    PcmMemory *mem = NULL;
    PcmOracle *oracle = NULL;
    CHECK(pcm_memory_new(&cfg, &mem));
    CHECK(pcm_oracle_new(D, &oracle));

    int8_t v[D];
    for (unsigned c = 0; c < CLASSES; c++) {
        for (unsigned shot = 0; shot < 5; shot++) {
            for (unsigned i = 0; i < D; i++) v[i] = sign(c, i);
            v[shot * 7] = (int8_t)-v[shot * 7];
            CHECK(pcm_memory_learn(mem, 100 + c, v, D, NULL));
            CHECK(pcm_oracle_learn(oracle, 100 + c, v, D));
        }
    }

    int agree = 0;
    for (unsigned c = 0; c < CLASSES; c++) {
        int8_t q[D];
        for (unsigned i = 0; i < D; i++) q[i] = (int8_t)(sign(c, i) * 90);
        uint32_t a = 0, b = 0;
        CHECK(pcm_memory_classify(mem, q, D, &a));
        CHECK(pcm_oracle_classify(oracle, q, D, &b));
        agree += (a == b && a == 100 + c);
    }

    uint32_t ids[2];
    int32_t codes[2];
    size_t n = 0;
    PcmStatus small = pcm_memory_scores(mem, v, D, ids, codes, 2, &n);

    PcmEnergyParams ep;
    PcmCost cost;
    CHECK(pcm_energy_params_default(&ep));
    CHECK(pcm_energy_class_update(&ep, 256, &cost));

    printf("agree=%d/%d small=%d n=%zu update_us=%.2f version=%s\n", agree, CLASSES, (int)small, n,
           cost.seconds * 1e6, pcm_version());
    pcm_memory_free(mem);
    pcm_oracle_free(oracle);
    return !(agree == CLASSES && small == PCM_STATUS_BUFFER_TOO_SMALL && n == CLASSES);
}
