#include <math.h>
#include <stdio.h>
#include <string.h>

#include "tonereserve.h"

int main(void) {
    size_t info[] = {2, 3};
    size_t comp[] = {1, 4};
    double re[] = {1.0, 1.0};
    TrProblem *problem = NULL;
    if (tr_problem_new(TR_SYSTEM_WALSH, 4, info, 2, comp, 2, re, NULL, &problem) != TR_STATUS_OK) return 1;
    TrResult *result = NULL;
    if (tr_solve(problem, TR_METHOD_BRUTE, 0, 0.0, &result) != TR_STATUS_OK) return 2;
    double sup = 0.0, gap = 0.0;
    bool converged = false;
    if (tr_result_summary(result, &sup, &gap, &converged) != TR_STATUS_OK) return 3;
    if (fabs(sup - 2.0) > 1e-9 || !converged) return 4;
    char *json = NULL;
    if (tr_result_to_json(result, &json) != TR_STATUS_OK || strstr(json, "\"brute\"") == NULL) return 5;
    tr_string_free(json);
    tr_result_free(result);
    tr_problem_free(problem);
    double papr = 0.0;
    if (tr_papr(TR_SYSTEM_WALSH, 3, re, NULL, &papr) != TR_STATUS_NOT_POWER_OF_TWO) return 6;
    if (tr_last_error_message() == NULL) return 7;
    puts("ok");
    return 0;
}
