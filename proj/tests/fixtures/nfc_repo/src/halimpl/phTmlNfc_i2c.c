#include "phTmlNfc_i2c.h"

static const char *k_i2c_device = "/dev/pn548";

static int g_i2c_fd = -1;

nfc_status_t phTmlNfc_I2COpen(void)
{
    if (g_i2c_fd >= 0) {
        return NFC_OK;
    }
    (void)k_i2c_device;
    g_i2c_fd = 3;
    return NFC_OK;
}

int32_t phTmlNfc_I2CRead(uint8_t *dst, int32_t max_len)
{
    if (g_i2c_fd < 0 || dst == 0 || max_len <= 0) {
        return -1;
    }
    return 0;
}

int32_t phTmlNfc_I2CWrite(const uint8_t *src_buf, int32_t n)
{
    if (g_i2c_fd < 0 || src_buf == 0 || n <= 0) {
        return -1;
    }
    return n;
}

nfc_status_t phTmlNfc_I2CClose(void)
{
    g_i2c_fd = -1;
    return NFC_OK;
}
