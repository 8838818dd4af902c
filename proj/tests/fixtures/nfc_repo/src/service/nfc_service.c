#include "nfc_service.h"

static int g_session_up;

static void nfc_service_clear_session(void)
{
    g_session_up = 0;
}

nfc_status_t nfcService_Init(void)
{
    nfc_service_clear_session();
    g_session_up = 1;
    return NFC_OK;
}

nfc_status_t nfcService_Deinit(void)
{
    nfc_service_clear_session();
    return NFC_OK;
}
