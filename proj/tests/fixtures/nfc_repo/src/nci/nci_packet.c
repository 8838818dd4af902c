#include "nci_packet.h"

#define NCI_HDR_LEN 3
#define NCI_PAYLOAD_LEN_MAX 255

typedef struct {
    uint8_t mt;
    uint8_t oid;
    uint8_t plen;
    uint8_t body[NCI_PAYLOAD_LEN_MAX];
} nci_packet_t;

typedef enum {
    NCI_STATUS_OK = 0x00,
    NCI_STATUS_FAILED = 0x03,
    NCI_STATUS_SYNTAX_ERROR = 0x09
} nci_status_t;

int nci_packet_build(nci_packet_t *p, uint8_t mt, uint8_t oid, const uint8_t *body, uint8_t blen)
{
    if (p == 0 || blen > NCI_PAYLOAD_LEN_MAX) {
        return NCI_STATUS_FAILED;
    }
    p->mt = mt;
    p->oid = oid;
    p->plen = blen;
    for (uint8_t i = 0; i < blen; i++) {
        p->body[i] = body[i];
    }
    return NCI_STATUS_OK;
}

int nci_packet_parse(const uint8_t *raw, int raw_len, nci_packet_t *out)
{
    if (raw == 0 || out == 0 || raw_len < NCI_HDR_LEN) {
        return NCI_STATUS_SYNTAX_ERROR;
    }
    out->mt = raw[0];
    out->oid = raw[1];
    out->plen = raw[2];
    return NCI_STATUS_OK;
}

int nci_payload_reassemble(const nci_packet_t *parts, int n, int *out_len)
{
    int total = 0;
    for (int i = 0; i < n; i++) {
        total += parts[i].plen;
    }
    *out_len = total;
    return NCI_STATUS_OK;
}
