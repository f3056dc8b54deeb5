/* Two objects with orthogonal embeddings approaching each other. */
#include <math.h>
#include <stdio.h>

#include "reidtrack.h"

int main(void) {
    RtConfig cfg;
    RtTracker *t = NULL;
    if (rt_config_default(&cfg) != RT_STATUS_OK || rt_tracker_new(&cfg, &t) != RT_STATUS_OK) {
        return 1;
    }
    double emb[2][4] = {{1, 0, 0, 0}, {0, 1, 0, 0}};
    for (uint32_t f = 1; f <= 3; f++) {
        double x = 10.0 * f;
        RtDetection dets[2] = {
            {x, 0, 10, 10, 0.9, 1},
            {100 - x, 0, 10, 10, f == 2 ? 0.5 : 0.9, 1},
        };
        /* swap detection order on frame 3 */
        double rows[8];
        int swap = f == 3;
        RtDetection in[2] = {dets[swap], dets[!swap]};
        for (int k = 0; k < 4; k++) {
            rows[k] = emb[swap][k];
            rows[4 + k] = emb[!swap][k];
        }
        size_t n = 0;
        if (rt_tracker_step(t, f, in, 2, rows, 4, &n) != RT_STATUS_OK) {
            return 2;
        }
        RtOutput out[8];
        size_t written = 0;
        if (rt_tracker_outputs(t, out, 8, &written) != RT_STATUS_OK) {
            return 3;
        }
        for (size_t i = 0; i < written; i++) {
            printf("%u %u %.1f\n", out[i].frame, out[i].track_id, out[i].x);
        }
    }
    size_t n = 0;
    RtStatus s = rt_tracker_step(t, 2, NULL, 0, NULL, 0, &n);
    char msg[256];
    rt_last_error_message(msg, sizeof msg);
    printf("status %d: %s\n", (int)s, msg);
    rt_tracker_free(t);

    double costs[4] = {1, 2, 2, INFINITY};
    int64_t r2c[2];
    double total = 0;
    rt_solve_assignment(costs, 2, 2, r2c, &total);
    printf("assign %lld %lld %.1f\n", (long long)r2c[0], (long long)r2c[1], total);
    return 0;
}
