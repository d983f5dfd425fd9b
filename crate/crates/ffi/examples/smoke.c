/* Minimal C client: runs the synthetic universe and prints table1. */
#include <stdio.h>

#include "splitstudy.h"

int main(int argc, char **argv) {
    unsigned long long seed = argc > 1 ? strtoull(argv[1], NULL, 10) : 0;
    SsReport *report = NULL;
    SsStatus st = ss_run_synthetic(seed, &report);
    if (st != SS_STATUS_OK) {
        fprintf(stderr, "run failed (%d): %s\n", (int)st, ss_last_error_message());
        return 1;
    }
    char *csv = NULL;
    st = ss_report_render(report, "table1", &csv);
    if (st != SS_STATUS_OK) {
        fprintf(stderr, "render failed: %s\n", ss_last_error_message());
        ss_report_free(report);
        return 1;
    }
    fputs(csv, stdout);
    ss_string_free(csv);

    double vf = 0.0;
    ss_value_factor(0.52, 1.1, &vf);
    printf("samples=%zu value_factor=%.3f\n", ss_report_sample_count(report), vf);

    st = ss_report_render(report, "fig99", &csv);
    printf("bad selector status=%d message=%s\n", (int)st, ss_last_error_message());
    ss_report_free(report);
    return 0;
}
