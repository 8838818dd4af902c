#include "nfc_service.h"

static int g_poll_active;

static void poll_loop_once(void)
{
    /* one pass over the antenna slots */
    g_poll_active = 1;
}

nfc_status_t nfcService_StartDiscovery(void)
{
    poll_loop_once();
    return NFC_OK;
}

nfc_status_t nfcService_StopDiscovery(void)
{
    g_poll_active = 0;
    return NFC_OK;
}
