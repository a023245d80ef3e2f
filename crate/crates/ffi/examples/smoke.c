/* Solves example_c1 through the C interface and prints the objective. */
#include <stdio.h>
#include "persuasion.h"

int main(void) {
    PersuasionProblem *p = NULL;
    PersuasionSolution *s = NULL;
    if (persuasion_problem_from_preset("example_c1", NULL, 31, 0, &p) != PERSUASION_STATUS_OK) {
        fprintf(stderr, "%s\n", persuasion_last_error());
        return 1;
    }
    if (persuasion_solve(p, NULL, &s) != PERSUASION_STATUS_OK) {
        fprintf(stderr, "%s\n", persuasion_last_error());
        persuasion_problem_free(p);
        return 1;
    }
    double objective = 0.0, gap = 0.0;
    persuasion_solution_objective(s, &objective, &gap);
    printf("objective %.12f gap %.3e\n", objective, gap);

    PersuasionProblem *bad = NULL;
    PersuasionStatus st = persuasion_problem_from_preset("nope", NULL, 31, 0, &bad);
    printf("unknown preset status %d\n", (int)st);

    persuasion_solution_free(s);
    persuasion_problem_free(p);
    return 0;
}
