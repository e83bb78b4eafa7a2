/* Build: cargo build -p monosync-ffi --release
 *        cc demo.c -I../include ../../../target/release/libmonosync_ffi.a -lm -lpthread -ldl */
#include <stdio.h>
#include "monosync.h"

int main(void) {
    MsCoupling *g = NULL;
    MsModel *m = NULL;
    MsTrajectory *t = NULL;
    double x[9] = {0.3, 1.0, 1.7, 2.2, 3.1, 3.9, 4.6, 5.4, 6.0};

    if (ms_coupling_expfam(-1, 0.1, 10, &g) != MS_STATUS_OK ||
        ms_model_new(g, 1.0, 10, &m) != MS_STATUS_OK) {
        fprintf(stderr, "%s\n", ms_last_error_message());
        return 1;
    }
    ms_coupling_free(g);

    MsSimOptions opts = ms_sim_options_default();
    if (ms_simulate(m, x, 9, &opts, &t) != MS_STATUS_OK) {
        fprintf(stderr, "%s\n", ms_last_error_message());
        ms_model_free(m);
        return 1;
    }
    MsTerminal kind;
    double at;
    ms_trajectory_terminal(t, &kind, &at);
    printf("terminal %d at t = %.6f after %zu merges\n", (int)kind, at, ms_trajectory_n_events(t));

    ms_trajectory_free(t);
    ms_model_free(m);
    return 0;
}
