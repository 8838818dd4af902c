#ifndef PHTMLNFC_I2C_H
#define PHTMLNFC_I2C_H

#include "nfc_types.h"

nfc_status_t phTmlNfc_I2COpen(void);
int32_t phTmlNfc_I2CRead(uint8_t *dst, int32_t max_len);
int32_t phTmlNfc_I2CWrite(const uint8_t *src_buf, int32_t n);
nfc_status_t phTmlNfc_I2CClose(void);

#endif
