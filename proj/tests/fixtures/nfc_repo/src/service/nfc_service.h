#ifndef NFC_SERVICE_H
#define NFC_SERVICE_H

#include "nfc_types.h"

nfc_status_t nfcService_Init(void);
nfc_status_t nfcService_Deinit(void);

#endif
