#ifndef NCI_PACKET_H
#define NCI_PACKET_H

#include "nfc_types.h"

int nci_payload_reassemble(const void *parts, int n, int *out_len);

#endif
