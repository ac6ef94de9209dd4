#include <math.h>
#include <stdio.h>
#include <string.h>

#include "spectrum_lease.h"

int main(void) {
    SlOperator op = {1.0, 0.5, exp(-1.0 / 100.0), 0.8, 100.0, 0};
    SlOperator ops[8];
    for (int i = 0; i < 8; i++) ops[i] = op;

    SlMarket *m = NULL;
    if (sl_market_new(2, 8, ops, NULL, &m) != SL_STATUS_OK) return 1;
    SlSolveResult r;
    if (sl_solve_homogeneous(m, &r) != SL_STATUS_OK) return 2;
    printf("%llu %.6f\n", (unsigned long long)r.t_star, r.u_perceived);

    if (sl_solve_sweep(m, 0, &r) != SL_STATUS_UNBOUNDED_HORIZON) return 3;
    char msg[256];
    size_t n = sl_last_error_message(msg, sizeof msg);
    if (n == 0 || strstr(msg, "horizon") == NULL) return 4;

    sl_market_free(m);
    return 0;
}
