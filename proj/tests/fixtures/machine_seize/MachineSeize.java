public class MachineSeize {
    IMachineSeize returnValue = null ;

    if(Price.isCalled())
    {

        try{
            //Small Machine feature
            //#if Small
            returnValue=MachineSmall.getPrice();
            //#endif
            //Big Machine feature
            //#if Big
            returnValue= MachineBig.getPrice();
            //#endif
            returnValue.adapte();
        }
        catch(SecurityMechanismException e){
            e.printStackTrace();}
    }
}
}
