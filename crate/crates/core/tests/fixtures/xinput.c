XIDeviceInfo* XIQueryDevice(Display *dpy, 
              int deviceid, int *ndevices_return)
{
  xXIQueryDeviceReply reply;
  XExtDisplayInfo *extinfo = XInput_find_display(dpy);
  *ndevices_return = -1;
  return NULL;
}
void XIFreeDeviceInfo(XIDeviceInfo* info)
{
  // POST: info != NULL
}
static int list_xi2(Display *display,
         enum print_format format)
{
  // PRE: true
  int ndev;
  XIDeviceInfo *info, *dev;
  info = XIQueryDevice(display, XIAllDevices, &ndev);
  XIFreeDeviceInfo(info);
}
