#include <math.h>
#include <stdio.h>
#include "onofri_lab.h"

int main(void) {
    double theta = 0.0;
    if (onofri_theta0(2.0, &theta) != ONOFRI_STATUS_OK || fabs(theta - 1.0) > 1e-15) return 1;
    if (onofri_theta0(7.0, &theta) != ONOFRI_STATUS_DOMAIN || onofri_last_error() == NULL) return 2;

    OnofriGeometry *g = NULL;
    if (onofri_geometry_sphere(32, 1.0, &g) != ONOFRI_STATUS_OK) return 3;
    double lam1 = 0.0;
    if (onofri_first_eigenvalue(g, &lam1) != ONOFRI_STATUS_OK || fabs(lam1 - 2.0) > 1e-10) return 4;

    size_t n = onofri_geometry_resolution(g);
    double nodes[32], vals[32];
    if (onofri_geometry_nodes(g, nodes, n, NULL) != ONOFRI_STATUS_OK) return 5;
    for (size_t i = 0; i < n; i++) vals[i] = 1e-3 * cos(nodes[i]);
    OnofriField *f = NULL;
    if (onofri_field_from_values(g, vals, n, &f) != ONOFRI_STATUS_OK) return 6;
    double q = 0.0;
    if (onofri_lambda_star_quotient(f, &q) != ONOFRI_STATUS_OK || fabs(q - 1.0) > 1e-4) return 7;

    onofri_field_free(f);
    onofri_geometry_free(g);
    printf("ok %s\n", onofri_version());
    return 0;
}
