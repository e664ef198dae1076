#include "fairrank.h"
#include <stdio.h>
#include <string.h>

int main(int argc, char **argv) {
    if (argc != 5) return 64;
    FrWorkload *workload = NULL;
    FrStatus status = fr_workload_load(argv[1], argv[2], argv[3], NULL, &workload);
    if (status != FR_STATUS_OK) { fprintf(stderr, "load: %s\n", fr_last_error()); return 1; }

    FrReport *report = NULL;
    status = fr_evaluate_run(workload, argv[4], 0.5, 0.7, false, &report);
    if (status != FR_STATUS_OK) { fprintf(stderr, "eval: %s\n", fr_last_error()); return 1; }

    double utility = 0.0, unfairness = 0.0;
    fr_report_mean_utility(report, &utility);
    fr_report_unfairness(report, &unfairness);
    printf("utility=%.16g unfairness=%.16g groups=%zu version=%s\n",
           utility, unfairness, fr_report_group_count(report), fr_version());

    fr_report_free(report);
    fr_workload_free(workload);
    return 0;
}
