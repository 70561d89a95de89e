#ifndef CI_F_H
#define CI_F_H

/* Invocation macro for the f custom instruction. */

#define CI_F_OPCODE 0

#define CI_F(p_a, p_b, p_c) \
  ((void) __builtin_custom_inii(CI_F_OPCODE, (int) (p_a), (int) (p_b)), \
   (int) __builtin_custom_inii(CI_F_OPCODE, (int) (p_c), 0))

#endif /* CI_F_H */
