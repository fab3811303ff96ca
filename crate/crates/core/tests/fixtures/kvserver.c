#define SIZE 100
typedef struct NODE {
    const char *key, *val;
    struct NODE *next;
} NODE;
NODE *db = NULL;
pthread_mutex_t mutx = PTHREAD_MUTEX_INITIALIZER;

void handle_client(int s) {
  char buf[SIZE], rep[SIZE];
  while (true) {
    ssize_t r = recv(s, buf, SIZE-1, 0);
    if (r <= 0) break;
    buf[r] = '\0';
    char cmd[SIZE] = {0}, key[SIZE], val[SIZE];
    sscanf(buf, "%s %s %s", cmd, key, val);
    if (strcmp(cmd, "GET") == 0) {
      snprintf(rep, SIZE, "ERROR\n");
      NODE *n, *p = NULL;
      pthread_mutex_lock(&mutx);
      for (n = db; n != NULL; p = n, n = n->next) {
        if (strcmp(n->key, key) != 0)
          continue;
        if (p != NULL) p->next = n->next;
        else           db = n->next;
      }
      pthread_mutex_unlock(&mutx);
      if (n != NULL) {
        snprintf(rep, SIZE, "%s\n", n->val);
        free(n->key); free(n->val); free(n);
      } else
        snprintf(rep, SIZE, "ERROR\n");
    } else if (strcmp(cmd, "PUT") == 0) {
      NODE *n = (NODE *)malloc(sizeof(NODE));
      pthread_mutex_lock(&mutx);
      n->key = strdup(key);
      n->val = strdup(val);
      n->next = db; db = n;
      pthread_mutex_unlock(&mutx);
      snprintf(rep, SIZE, "OK\n");
    } else
      snprintf(rep, SIZE, "ERROR\n");
    send(s, rep, strlen(rep), 0);
  }
  close(s);
}
