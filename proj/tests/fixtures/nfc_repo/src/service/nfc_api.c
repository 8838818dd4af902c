#include "nfc_service.h"

nfc_status_t nfcApi_Connect(int target_id)
{
    if (target_id < 0) {
        return NFC_BAD_PARAM;
    }
    return NFC_OK;
}

nfc_status_t nfcApi_Disconnect(int target_id)
{
    (void)target_id;
    return NFC_OK;
}

nfc_status_t nfcApi_Transceive(const void *tx, int tx_len, void *rx, int *rx_len)
{
    if (tx == 0 || rx == 0 || rx_len == 0) {
        return NFC_BAD_PARAM;
    }
    if (tx_len <= 0) {
        return NFC_BAD_PARAM;
    }
    *rx_len = 0;
    return NFC_OK;
}
