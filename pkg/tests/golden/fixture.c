#include <stdio.h>
#include <stdint.h>

/* The accumulate step x = (a * b) + c; in this comment must survive. */
static const char *formula = "x = (a * b) + c;";

int compute(int a, int b, int c) {
    int x;
    x = (a * b) + c;
    return x;
}

int main(void) {
    printf("%s -> %d\n", formula, compute(2, 3, 4));
    return 0;
}
