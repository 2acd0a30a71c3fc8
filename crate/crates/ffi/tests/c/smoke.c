#include <math.h>
#include <stdio.h>
#include <string.h>

#include "pseudonymetry.h"

#define CHECK(cond)                                                        \
    do {                                                                   \
        if (!(cond)) {                                                     \
            const char *msg = psym_last_error_message();                   \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__, #cond, \
                    msg ? msg : "no error message");                       \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(int argc, char **argv) {
    const char *path = argc > 1 ? argv[1] : "smoke.psymspec";
    uint8_t chips[15];
    CHECK(psym_pn_sequence(true, chips) == PSYM_STATUS_OK);
    CHECK(chips[0] == 1 && chips[1] == 0 && chips[14] == 0);

    size_t len = 0;
    CHECK(psym_encode_packet(0x5a3c96e, NULL, 0, &len) == PSYM_STATUS_INVALID_ARGUMENT);
    CHECK(len == 2520);

    PsymBlock *block = NULL;
    CHECK(psym_block_simulate(0x5a3c96e, 3, INFINITY, 0, 4, 2, 100, &block) == PSYM_STATUS_OK);
    CHECK(psym_block_cols(block) == 4);
    CHECK(psym_block_write(block, path) == PSYM_STATUS_OK);
    psym_block_free(block);

    PsymBlock *loaded = NULL;
    CHECK(psym_block_read(path, &loaded) == PSYM_STATUS_OK);
    PsymReport *report = NULL;
    CHECK(psym_decode(loaded, 2, 0x5a3c96e, true, &report) == PSYM_STATUS_OK);
    CHECK(psym_report_total_bits(report) == 84);
    CHECK(psym_report_bit_errors(report) == 0);
    PsymSync sync;
    CHECK(psym_report_sync(report, &sync) == PSYM_STATUS_OK);
    CHECK(sync.start_bin == 100);
    psym_report_free(report);

    CHECK(psym_decode(loaded, 0, 0x5a3c96e, true, &report) != PSYM_STATUS_OK || report != NULL);
    psym_block_free(loaded);

    CHECK(psym_block_read("/nonexistent/file.psymspec", &loaded) == PSYM_STATUS_IO);
    CHECK(strlen(psym_last_error_message()) > 0);
    printf("ok %s\n", psym_version());
    return 0;
}
