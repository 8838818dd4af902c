#include "phTmlNfc_i2c.h"

#define I2C_CFG_RETRY_BUDGET 3

static int i2c_pin_mux_setup(int bank)
{
    return bank >= 0 ? 0 : -1;
}

static int i2c_clock_rate_set(int hz)
{
    return hz > 0 ? 0 : -1;
}

nfc_status_t phTmlNfc_i2c_open_and_configure(const char *transport_link)
{
    if (transport_link == 0) {
        return NFC_BAD_PARAM;
    }
    if (i2c_pin_mux_setup(0) != 0) {
        return NFC_FAILED;
    }
    if (i2c_clock_rate_set(400000) != 0) {
        return NFC_FAILED;
    }
    return NFC_OK;
}
